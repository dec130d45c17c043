#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rapidlearn/switch.hpp"

using namespace rapidlearn;

namespace {

constexpr EndpointAddr hA{1}, h2{2}, h5{5};

SwitchState make_switch(std::size_t ports, bool monitor = true, std::vector<PortInfo> info = {}) {
  if (info.empty()) info.resize(ports);
  return SwitchState(NodeId{10}, NodeId{1}, monitor ? std::optional<NodeId>(NodeId{20}) : std::nullopt, info);
}

PacketView pkt(EndpointAddr s, EndpointAddr d) { return {s, d, 100}; }

}  // namespace

TEST_CASE("unknown destination punts and mirrors") {
  auto sw = make_switch(4);
  auto r = sw.handle_packet(pkt(hA, h2), PortId{1});
  CHECK(std::holds_alternative<PuntToController>(r.action));
  REQUIRE(r.mirror.has_value());
  CHECK(*r.mirror == MonPacket{NodeId{1}, NodeId{10}, hA, h2, 100});
}

TEST_CASE("no mirror without a monitor") {
  auto sw = make_switch(2, false);
  CHECK_FALSE(sw.handle_packet(pkt(hA, h2), PortId{0}).mirror.has_value());
}

TEST_CASE("single entry hit forwards") {
  auto sw = make_switch(4);
  sw.install_flow(h2, PortId{3});
  auto r = sw.handle_packet(pkt(hA, h2), PortId{1});
  CHECK(std::get<Forward>(r.action) == Forward{PortId{3}});
}

TEST_CASE("higher priority entry wins") {
  auto sw = make_switch(5);
  sw.install_flow(h2, PortId{3});
  sw.install_flow(h2, PortId{4});
  REQUIRE(sw.flow_table().size() == 2);
  CHECK(std::get<Forward>(sw.handle_packet(pkt(hA, h2), PortId{1}).action) == Forward{PortId{4}});
}

TEST_CASE("blocked flow drops but still mirrors") {
  auto sw = make_switch(4);
  sw.install_flow(h2, PortId{3});
  sw.apply_block(hA, h2);
  auto r = sw.handle_packet(pkt(hA, h2), PortId{1});
  CHECK(std::get<Drop>(r.action).reason == DropReason::Blocked);
  CHECK(r.mirror.has_value());
}

TEST_CASE("hit on the ingress port is a hairpin drop") {
  auto sw = make_switch(3);
  sw.install_flow(h2, PortId{1});
  CHECK(std::get<Drop>(sw.handle_packet(pkt(hA, h2), PortId{1}).action).reason == DropReason::Hairpin);
}

TEST_CASE("invalid ingress port") {
  auto sw = make_switch(2);
  CHECK_THROWS_AS(sw.handle_packet(pkt(hA, h2), PortId{2}), Error);
  CHECK_THROWS_AS(sw.install_flow(h2, PortId{7}), Error);
}

TEST_CASE("install priorities and idempotence") {
  FlowTable t;
  CHECK(t.install(h2, PortId{3}));
  CHECK(t.max_priority() == 1);
  CHECK(t.entries().front() == FlowEntry{h2, PortId{3}, 1});
  CHECK(t.install(h5, PortId{1}));
  CHECK(t.max_priority() == 2);
  CHECK(t.entries()[0].priority == 2);
  CHECK(t.entries()[1].priority == 1);
  FlowTable before = t;
  CHECK_FALSE(t.install(h5, PortId{1}));
  CHECK(t == before);
  CHECK(t.to_csv() == "priority,dst,out_port\n2,5,1\n1,2,3\n");
}

TEST_CASE("broadcast ports") {
  auto sw = make_switch(4);
  auto copies = sw.handle_broadcast(PortId{2}, pkt(hA, h2));
  std::vector<PortId> ports;
  for (auto& [p, _] : copies) ports.push_back(p);
  CHECK(ports == std::vector<PortId>{PortId{0}, PortId{1}, PortId{3}});

  auto lone = make_switch(1);
  CHECK(lone.handle_broadcast(PortId{0}, pkt(hA, h2)).empty());

  std::vector<PortInfo> info(4);
  info[1].host = hA;
  auto guarded = make_switch(4, true, info);
  guarded.handle_packet(pkt(hA, h5), PortId{1});
  guarded.apply_block(hA, h5);
  REQUIRE(guarded.blocked_ports() == std::set<PortId>{PortId{1}});
  ports.clear();
  for (auto& [p, _] : guarded.handle_broadcast(PortId{2}, pkt(h2, h5))) ports.push_back(p);
  CHECK(ports == std::vector<PortId>{PortId{0}, PortId{3}});
}

TEST_CASE("block on the attacker's access switch blocks its port") {
  std::vector<PortInfo> info(3);
  info[1].host = hA;
  auto sw = make_switch(3, true, info);
  sw.handle_packet(pkt(hA, h2), PortId{1});
  sw.apply_block(hA, h2);
  CHECK(sw.blocked() == std::set<FlowKey>{{hA, h2}});
  CHECK(sw.blocked_ports() == std::set<PortId>{PortId{1}});

  auto twice = sw;
  twice.apply_block(hA, h2);
  CHECK(twice.blocked() == sw.blocked());
  CHECK(twice.blocked_ports() == sw.blocked_ports());
}

TEST_CASE("block on a core switch leaves trunks open") {
  auto sw = make_switch(3);
  sw.handle_packet(pkt(hA, h2), PortId{0});
  sw.apply_block(hA, h2);
  CHECK(sw.blocked() == std::set<FlowKey>{{hA, h2}});
  CHECK(sw.blocked_ports().empty());
  sw.install_flow(h5, PortId{2});
  // Other flows over the same trunk keep flowing.
  CHECK(std::holds_alternative<Forward>(sw.handle_packet(pkt(hA, h5), PortId{0}).action));
}

TEST_CASE("blocked flow is never forwarded or flooded") {
  std::vector<PortInfo> info(4);
  info[3].host = hA;
  auto sw = make_switch(4, true, info);
  sw.install_flow(h2, PortId{0});
  sw.handle_packet(pkt(hA, h2), PortId{3});
  sw.apply_block(hA, h2);
  for (std::uint16_t in = 0; in < 4; ++in) {
    CHECK(std::holds_alternative<Drop>(sw.handle_packet(pkt(hA, h2), PortId{in}).action));
    CHECK(sw.handle_broadcast(PortId{in}, pkt(hA, h2)).empty());
  }
}

TEST_CASE("scan matching equals the countdown recursion") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    FlowTable t;
    const std::size_t installs = rng() % 65;
    while (t.size() < 64 && installs > 0 && t.size() < installs) t.install(EndpointAddr{static_cast<std::uint32_t>(rng() % 12)}, PortId{static_cast<std::uint16_t>(rng() % 6)});
    for (std::uint32_t d = 0; d < 14; ++d) {
      auto scan = t.match(EndpointAddr{d});
      auto ref = oracle::countdown_match(t.entries(), EndpointAddr{d});
      CHECK(scan == ref);
    }
  }
}

TEST_CASE("every handled packet is mirrored") {
  std::mt19937_64 rng(11);
  std::size_t handled = 0, mirrored = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ports = 2 + rng() % 5;
    auto sw = make_switch(ports);
    for (int i = 0; i < 40; ++i) {
      const EndpointAddr s{static_cast<std::uint32_t>(rng() % 5)}, d{static_cast<std::uint32_t>(rng() % 5)};
      switch (rng() % 4) {
        case 0: sw.install_flow(d, PortId{static_cast<std::uint16_t>(rng() % ports)}); break;
        case 1: sw.apply_block(s, d); break;
        default:
          ++handled;
          mirrored += sw.handle_packet(pkt(s, d), PortId{static_cast<std::uint16_t>(rng() % ports)}).mirror.has_value();
      }
    }
  }
  CHECK(handled > 0);
  CHECK(mirrored == handled);
}
