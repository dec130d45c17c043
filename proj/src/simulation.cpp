#include "rapidlearn/simulation.hpp"

#include <algorithm>
#include <json.hpp>

#include "rapidlearn/rng.hpp"

namespace rapidlearn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void unexpected(NodeId node, const Message& msg) {
  throw Error(ErrorCode::SimulationError,
              "node " + std::to_string(node.value) + " cannot handle " + std::string(message_tag(msg)));
}

constexpr std::uint64_t kFaultStream = 0x6661756c74ULL;

}  // namespace

Simulation::Simulation(const ScenarioConfig& config, std::shared_ptr<const SvcModel> model, SimulationOptions options)
    : config_(config), topology_(build_topology(config.topology)), options_(std::move(options)) {
  for (const Node& n : topology_.nodes()) {
    switch (n.kind) {
      case NodeKind::Host: {
        auto sw = topology_.neighbor_at(n.id, PortId{0});
        hosts_.emplace(n.id, Host(n.id, *n.addr, sw->first));
        break;
      }
      case NodeKind::Switch: {
        std::vector<PortInfo> ports(topology_.port_count(n.id));
        std::map<NodeId, PortId> port_of;
        for (std::size_t p = 0; p < ports.size(); ++p) {
          PortId port{static_cast<std::uint16_t>(p)};
          auto nb = topology_.neighbor_at(n.id, port);
          const Node& other = topology_.node(nb->first);
          if (other.kind == NodeKind::Host) ports[p].host = other.addr;
          port_of[nb->first] = port;
        }
        SwitchState state(n.id, topology_.controller_of(n.id), topology_.monitor_of(n.id), std::move(ports));
        switches_.emplace(n.id, SwitchNode{std::move(state), std::move(port_of), {}, 1});
        break;
      }
      case NodeKind::Controller: {
        auto mons = topology_.monitors_of(n.id);
        controllers_.emplace(n.id, Controller(n.id, topology_.switches_of(n.id), mons,
                                              config_.controller.for_domain(mons.size())));
        break;
      }
      case NodeKind::Monitor: {
        auto ctrl = topology_.controller_of_monitor(n.id);
        auto sw = topology_.switch_of_monitor(n.id);
        if (!ctrl || !sw)
          throw Error(ErrorCode::InvalidTopology, "monitor " + n.name + " is not attached to a switch");
        Monitor mon(n.id, *ctrl, *sw, topology_.peers_of(n.id), config_.monitor, model);
        if (options_.window_log) {
          NodeId id = n.id;
          auto sink = options_.window_log;
          mon.set_window_log([id, sink](const WindowRecord& r) { sink(id, r); });
        }
        monitors_.emplace(n.id, std::move(mon));
        break;
      }
    }
  }

  for (const FlowSpec& f : config_.traffic.flows) {
    FlowKey key{f.src, f.dst};
    auto [it, fresh] = flow_metrics_.try_emplace(key);
    FlowMetrics& m = it->second;
    if (fresh) {
      m.flow = key;
      m.kind = f.kind;
      m.start = f.start();
      continue;
    }
    // Several specs may share a key; attack wins and the clock starts at
    // the earliest attack segment.
    if (f.kind == TrafficLabel::Attack && m.kind != TrafficLabel::Attack) {
      m.kind = TrafficLabel::Attack;
      m.start = f.start();
    } else if (f.kind == m.kind) {
      m.start = std::min(m.start, f.start());
    }
  }

  auto rows = generate_packets(config_.traffic, config_.seed);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& r = rows[i];
    if (!(r.timestamp < config_.t_end)) continue;
    auto host = topology_.host_by_addr(r.src);
    if (!host) throw Error(ErrorCode::UnknownNode, "no host with address " + std::to_string(r.src.value));
    hosts_.at(*host).enqueue(Packet{i, r.src, r.dst, r.size_bytes, r.timestamp, r.label});
  }

  if (config_.duplicate_control_prob > 0.0)
    engine_.set_duplication(config_.duplicate_control_prob, splitmix64(config_.seed ^ kFaultStream));
  engine_.set_recording(options_.record_trace);
  for (auto& [id, host] : hosts_) schedule_injection(host);
}

NodeId Simulation::node(std::string_view name) const {
  auto id = topology_.find(name);
  if (!id) throw Error(ErrorCode::UnknownNode, "no node named " + std::string(name));
  return *id;
}

void Simulation::run() {
  auto trace = engine_.run_until(config_.t_end + config_.drain, [this](const Event& ev) { dispatch(ev); });
  trace_.insert(trace_.end(), std::make_move_iterator(trace.begin()), std::make_move_iterator(trace.end()));
}

void Simulation::schedule_injection(Host& host) {
  if (!host.has_next()) return;
  const Packet& next = host.peek();
  engine_.schedule_at(std::max(next.created_at, engine_.now()), host.id(), PacketMsg{next, host.id()});
}

void Simulation::dispatch(const Event& ev) {
  ++events_;
  NodeId target = ev.target;
  if (auto h = hosts_.find(target); h != hosts_.end()) return on_host(h->second, ev.message);
  if (auto s = switches_.find(target); s != switches_.end()) return on_switch(s->second, ev.message);
  if (auto c = controllers_.find(target); c != controllers_.end()) return on_controller(c->second, ev.message);
  if (auto m = monitors_.find(target); m != monitors_.end()) return on_monitor(m->second, ev.message);
  throw Error(ErrorCode::UnknownNode, "event for unknown node " + std::to_string(target.value));
}

void Simulation::emit(NodeId from, std::vector<Outgoing> out) {
  for (auto& o : out) engine_.send(topology_, from, o.to, std::move(o.message));
}

void Simulation::on_host(Host& host, const Message& msg) {
  const auto* pm = std::get_if<PacketMsg>(&msg);
  if (!pm) unexpected(host.id(), msg);
  if (pm->from == host.id()) {
    Packet p = host.take_next();
    if (auto it = flow_metrics_.find(p.flow()); it != flow_metrics_.end()) ++it->second.sent;
    engine_.send(topology_, host.id(), host.attached_switch(), PacketMsg{p, host.id()});
    schedule_injection(host);
    return;
  }
  if (!host.receive(pm->packet)) return;
  auto it = flow_metrics_.find(pm->packet.flow());
  if (it == flow_metrics_.end()) return;
  FlowMetrics& m = it->second;
  ++m.delivered;
  if (m.block_time && pm->packet.created_at >= *m.block_time) ++m.delivered_post_block;
}

void Simulation::output(SwitchNode& sw, PortId port, const Packet& packet) {
  auto nb = topology_.neighbor_at(sw.state.id(), port);
  if (!nb) throw Error(ErrorCode::InvalidPort, "switch has no port " + std::to_string(port.value));
  if (config_.monitor.rate_limit && topology_.node(nb->first).kind == NodeKind::Host) {
    if (auto mon = topology_.monitor_of(sw.state.id())) {
      if (!monitors_.at(*mon).admit(packet.flow(), engine_.now())) return;
    }
  }
  engine_.send(topology_, sw.state.id(), nb->first, PacketMsg{packet, sw.state.id()});
}

void Simulation::on_switch(SwitchNode& sw, const Message& msg) {
  const NodeId id = sw.state.id();
  std::visit(
      Overloaded{
          [&](const PacketMsg& pm) {
            auto port = sw.port_of.find(pm.from);
            if (port == sw.port_of.end())
              throw Error(ErrorCode::NoSuchLink, "packet from non-neighbor " + std::to_string(pm.from.value));
            PortId in_port = port->second;
            SwitchResult result = sw.state.handle_packet(pm.packet.view(), in_port);
            if (result.mirror) engine_.send(topology_, id, *topology_.monitor_of(id), *result.mirror);
            std::visit(Overloaded{
                           [&](const Forward& f) { output(sw, f.out_port, pm.packet); },
                           [&](const PuntToController&) {
                             std::uint64_t buffer = sw.next_buffer++;
                             sw.buffered.emplace(buffer, std::make_pair(pm.packet, in_port));
                             engine_.send(topology_, id, topology_.controller_of(id),
                                          OfPacket{id, in_port, pm.packet.src, pm.packet.dst, buffer});
                           },
                           [&](const Flood& f) {
                             for (auto& [p, pkt] : sw.state.handle_broadcast(f.except, pm.packet)) output(sw, p, pkt);
                           },
                           [&](const Drop&) {},
                       },
                       result.action);
          },
          [&](const FlowMod& fm) { sw.state.install_flow(fm.dst_addr, fm.out_port); },
          [&](const Broadcast& b) {
            auto it = sw.buffered.find(b.buffer_id);
            if (it == sw.buffered.end()) return;  // already released by a duplicate
            Packet pkt = std::move(it->second.first);
            sw.buffered.erase(it);
            for (auto& [p, copy] : sw.state.handle_broadcast(b.in_port, pkt)) output(sw, p, copy);
          },
          [&](const Block& b) {
            sw.state.apply_block(b.src, b.dst);
            FlowKey key{b.src, b.dst};
            if (auto mon = topology_.monitor_of(id)) monitors_.at(*mon).disengage(key);
            auto it = flow_metrics_.find(key);
            if (it == flow_metrics_.end()) {
              it = flow_metrics_.emplace(key, FlowMetrics{}).first;
              it->second.flow = key;
            }
            if (!it->second.block_time) it->second.block_time = engine_.now();
          },
          [&](const auto&) { unexpected(id, msg); },
      },
      msg);
}

void Simulation::on_controller(Controller& ctrl, const Message& msg) {
  if (const auto* of = std::get_if<OfPacket>(&msg)) return emit(ctrl.id(), ctrl.handle_of_packet(*of));
  const auto* report = std::get_if<DdosYes>(&msg);
  if (!report) unexpected(ctrl.id(), msg);
  auto decision = ctrl.handle_ddos_report(*report, engine_.now());
  if (!decision) return;
  decisions_.push_back(DecisionRecord{decision->time, ctrl.id(), decision->flow, decision->voters, decision->targets});
  for (NodeId target : decision->targets)
    engine_.send(topology_, ctrl.id(), target, Block{decision->flow.src, decision->flow.dst});
}

void Simulation::on_monitor(Monitor& mon, const Message& msg) {
  const double now = engine_.now();
  if (const auto* mp = std::get_if<MonPacket>(&msg)) return emit(mon.id(), mon.ingest(*mp, now));
  const auto* belief = std::get_if<BeliefMsg>(&msg);
  if (!belief) unexpected(mon.id(), msg);
  if (auto report = mon.receive_belief(*belief, now))
    engine_.send(topology_, mon.id(), *topology_.controller_of_monitor(mon.id()), *report);
}

MetricsReport Simulation::metrics() const {
  MetricsReport r;
  for (const auto& [key, m] : flow_metrics_) {
    r.flows.push_back(m);
    if (m.kind == TrafficLabel::Attack) {
      r.attacker_pkts_delivered_total += m.delivered;
      r.attacker_pkts_delivered_post_block += m.delivered_post_block;
    } else {
      r.legit_sent += m.sent;
      r.legit_delivered += m.delivered;
    }
  }
  if (r.legit_sent > 0) r.legit_delivery_ratio = static_cast<double>(r.legit_delivered) / static_cast<double>(r.legit_sent);
  for (const auto& d : decisions_) {
    auto it = flow_metrics_.find(d.flow);
    if (it == flow_metrics_.end() || it->second.kind != TrafficLabel::Attack) ++r.false_blocks;
  }
  for (const auto& [id, mon] : monitors_) r.monitor_reports[id] = mon.reports_sent();
  r.decisions = decisions_;
  r.events = events_;
  return r;
}

namespace {

std::string addr_name(const Topology& topo, EndpointAddr addr) {
  if (auto h = topo.host_by_addr(addr)) return topo.node(*h).name;
  return std::to_string(addr.value);
}

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report, const Topology& topology, const ScenarioConfig& config) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["seed"] = config.seed;
  doc["t_end"] = config.t_end;
  doc["events"] = report.events;
  doc["attacker_pkts_delivered_total"] = report.attacker_pkts_delivered_total;
  doc["attacker_pkts_delivered_post_block"] = report.attacker_pkts_delivered_post_block;
  doc["legit_sent"] = report.legit_sent;
  doc["legit_delivered"] = report.legit_delivered;
  doc["legit_delivery_ratio"] = opt(report.legit_delivery_ratio);
  doc["false_blocks"] = report.false_blocks;

  json flows = json::array();
  for (const auto& f : report.flows) {
    flows.push_back(json{{"src", addr_name(topology, f.flow.src)},
                         {"dst", addr_name(topology, f.flow.dst)},
                         {"kind", std::string(label_name(f.kind))},
                         {"start", f.start},
                         {"block_time", opt(f.block_time)},
                         {"detection_latency", opt(f.detection_latency())},
                         {"sent", f.sent},
                         {"delivered", f.delivered},
                         {"delivered_post_block", f.delivered_post_block}});
  }
  doc["flows"] = std::move(flows);

  json reports = json::object();
  for (const auto& [id, n] : report.monitor_reports) reports[topology.node(id).name] = n;
  doc["monitor_reports"] = std::move(reports);

  json decisions = json::array();
  for (const auto& d : report.decisions) {
    json voters = json::array(), targets = json::array();
    for (NodeId v : d.voters) voters.push_back(topology.node(v).name);
    for (NodeId t : d.targets) targets.push_back(topology.node(t).name);
    decisions.push_back(json{{"time", d.time},
                             {"controller", topology.node(d.controller).name},
                             {"src", addr_name(topology, d.flow.src)},
                             {"dst", addr_name(topology, d.flow.dst)},
                             {"voters", std::move(voters)},
                             {"targets", std::move(targets)}});
  }
  doc["decisions"] = std::move(decisions);
  return doc.dump(2) + "\n";
}

}  // namespace rapidlearn
