#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rapidlearn/traffic.hpp"

using namespace rapidlearn;

namespace {

FlowSpec flow(std::uint32_t src, std::uint32_t dst, double start, double stop, double rate, ArrivalProcess arrival,
              TrafficLabel kind = TrafficLabel::Legit) {
  FlowSpec f;
  f.src = EndpointAddr{src};
  f.dst = EndpointAddr{dst};
  f.kind = kind;
  f.segments = {RateSegment{start, stop, rate}};
  f.arrival = arrival;
  f.size = SizeDist::fixed(100);
  return f;
}

ErrorCode code_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_trace_csv(in, "t.csv");
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("uniform arrivals are evenly spaced") {
  TrafficSpec s{{flow(1, 2, 0.0, 2.0, 10.0, ArrivalProcess::Uniform)}};
  auto rows = generate_packets(s, 1);
  REQUIRE(rows.size() == 20);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].timestamp == doctest::Approx(0.1 * i).epsilon(1e-12));
}

TEST_CASE("poisson counts for pinned seeds") {
  TrafficSpec s{{flow(1, 2, 0.0, 100.0, 50.0, ArrivalProcess::Poisson)}};
  const double mean = 5000.0, band = 4.0 * std::sqrt(mean);
  const std::pair<std::uint64_t, std::size_t> golden[] = {{1, 5068}, {7, 4970}, {42, 5004}};
  for (auto [seed, count] : golden) {
    auto rows = generate_packets(s, seed);
    CHECK(rows.size() == count);
    CHECK(std::abs(static_cast<double>(rows.size()) - mean) <= band);
    for (const auto& r : rows) {
      CHECK(r.timestamp >= 0.0);
      CHECK(r.timestamp < 100.0);
    }
  }
}

TEST_CASE("generation is sorted, labeled and deterministic") {
  TrafficSpec s{{flow(1, 2, 0.0, 5.0, 30.0, ArrivalProcess::Poisson),
                 flow(3, 2, 1.0, 4.0, 200.0, ArrivalProcess::Uniform, TrafficLabel::Attack)}};
  s.flows[0].size = SizeDist::uniform(400, 1200);
  auto a = generate_packets(s, 9);
  CHECK(a == generate_packets(s, 9));
  CHECK(a != generate_packets(s, 10));
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].timestamp <= a[i].timestamp);
  for (const auto& r : a) {
    REQUIRE(r.label.has_value());
    CHECK((*r.label == TrafficLabel::Attack) == (r.src.value == 3));
    if (r.src.value == 1) {
      CHECK(r.size_bytes >= 400);
      CHECK(r.size_bytes <= 1200);
    }
  }
}

TEST_CASE("multi-phase flows") {
  FlowSpec f = flow(1, 2, 0.0, 1.0, 10.0, ArrivalProcess::Uniform);
  f.segments.push_back(RateSegment{5.0, 6.0, 20.0});
  auto rows = generate_packets(TrafficSpec{{f}}, 1);
  CHECK(rows.size() == 30);
  CHECK(rows[10].timestamp == 5.0);
  CHECK(f.start() == 0.0);
}

TEST_CASE("empty spec gives an empty trace") { CHECK(generate_packets(TrafficSpec{}, 1).empty()); }

TEST_CASE("spec validation") {
  auto bad = [](FlowSpec f) {
    try {
      generate_packets(TrafficSpec{{f}}, 1);
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidSpec;
    }
    return false;
  };
  CHECK(bad(flow(1, 2, 3.0, 1.0, 10.0, ArrivalProcess::Uniform)));
  CHECK(bad(flow(1, 2, 0.0, 1.0, 0.0, ArrivalProcess::Uniform)));
  CHECK(bad(flow(1, 1, 0.0, 1.0, 1.0, ArrivalProcess::Uniform)));
  auto sz = flow(1, 2, 0.0, 1.0, 1.0, ArrivalProcess::Uniform);
  sz.size = SizeDist::uniform(10, 5);
  CHECK(bad(sz));
}

TEST_CASE("csv reading") {
  std::istringstream ok("timestamp,src,dst,size_bytes,label\n0.5,1,2,100,attack\n0.75,10.0.0.1,2,60,legit\n1,3,2,70,\n");
  auto rows = read_trace_csv(ok);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == TrafficLabel::Attack);
  CHECK(rows[1].src.value == 0x0A000001u);
  CHECK_FALSE(rows[2].label.has_value());

  std::istringstream unlabeled("timestamp,src,dst,size_bytes\n0,1,2,3\n");
  CHECK(read_trace_csv(unlabeled).size() == 1);

  CHECK(code_of("timestamp,src,dst,size_bytes\n0,1,2,abc\n") == ErrorCode::MalformedRow);
  CHECK(code_of("timestamp,src,dst,size_bytes\n5,1,2,3\n3,1,2,3\n") == ErrorCode::UnsortedTrace);
  CHECK(code_of("timestamp,src,dst,size_bytes,label\n0,1,2,3,evil\n") == ErrorCode::UnknownLabel);
  CHECK(code_of("time,src,dst\n") == ErrorCode::MalformedRow);
  CHECK(code_of("timestamp,src,dst,size_bytes\n0,1,2\n") == ErrorCode::MalformedRow);

  std::istringstream bad("timestamp,src,dst,size_bytes\n0,1,2,3\n1,1,2,x\n");
  try {
    read_trace_csv(bad, "t.csv");
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.csv:3") != std::string::npos);
  }
}

TEST_CASE("csv write and read back") {
  TrafficSpec s{{flow(1, 2, 0.0, 1.0, 7.0, ArrivalProcess::Poisson)}};
  auto rows = generate_packets(s, 3);
  std::stringstream ss;
  write_trace_csv(ss, rows);
  CHECK(read_trace_csv(ss) == rows);
}

TEST_CASE("windowize features and labels") {
  std::vector<TraceRow> rows;
  const double gap = (1.0 / 99.0) * (1.0 - 1e-9);
  for (int i = 0; i < 100; ++i) rows.push_back({i * gap, EndpointAddr{1}, EndpointAddr{2}, 100, TrafficLabel::Attack});
  auto d = windowize(rows, 1.0);
  REQUIRE(d.size() == 1);
  CHECK(d.rows[0].y == 1);
  CHECK(d.rows[0].x[0] == 100.0);
  CHECK(d.rows[0].x[1] == doctest::Approx(1.0 / 99.0).epsilon(1e-8));
  CHECK(d.rows[0].x[2] == 100.0);
  CHECK(d.rows[0].x[3] == 10000.0);

  std::vector<TraceRow> single{{0.3, EndpointAddr{1}, EndpointAddr{2}, 80, TrafficLabel::Legit}};
  auto s = windowize(single, 2.0);
  REQUIRE(s.size() == 1);
  CHECK(s.rows[0].x[1] == 2.0);
  CHECK(s.rows[0].y == -1);

  std::vector<TraceRow> mixed{{0.0, EndpointAddr{1}, EndpointAddr{2}, 80, TrafficLabel::Legit},
                              {0.5, EndpointAddr{1}, EndpointAddr{2}, 80, TrafficLabel::Attack},
                              {0.7, EndpointAddr{1}, EndpointAddr{2}, 80, TrafficLabel::Legit}};
  auto m = windowize(mixed, 1.0);
  REQUIRE(m.size() == 1);
  CHECK(m.rows[0].y == 1);

  std::vector<TraceRow> unlabeled{{0.0, EndpointAddr{1}, EndpointAddr{2}, 80, std::nullopt}};
  CHECK_THROWS_AS(windowize(unlabeled, 1.0), Error);
  CHECK(windowize({}, 1.0).empty());
}

TEST_CASE("host accounting") {
  Host idle(NodeId{5}, EndpointAddr{1}, NodeId{0});
  CHECK_FALSE(idle.has_next());
  CHECK(idle.sent() == 0);

  Host h(NodeId{5}, EndpointAddr{1}, NodeId{0});
  h.enqueue(Packet{0, EndpointAddr{1}, EndpointAddr{2}, 10, 0.0, std::nullopt});
  REQUIRE(h.has_next());
  CHECK(h.take_next().id == 0);
  CHECK(h.sent() == 1);
  CHECK(h.receive(Packet{1, EndpointAddr{2}, EndpointAddr{1}, 10, 0.0, std::nullopt}));
  CHECK_FALSE(h.receive(Packet{2, EndpointAddr{2}, EndpointAddr{3}, 10, 0.0, std::nullopt}));
  CHECK(h.received() == 1);
}

TEST_CASE("endpoint parsing") {
  CHECK(parse_endpoint("17")->value == 17);
  CHECK(parse_endpoint("192.168.0.1")->value == 0xC0A80001u);
  CHECK_FALSE(parse_endpoint("1.2.3").has_value());
  CHECK_FALSE(parse_endpoint("300.1.1.1").has_value());
  CHECK_FALSE(parse_endpoint("x").has_value());
}
