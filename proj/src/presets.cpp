#include "rapidlearn/presets.hpp"

namespace rapidlearn {

namespace {

// 24 legit sessions between addresses 1..24 and 24 flooding sources
// (101..124) aimed at three victims, all over [0, 50) s. Rates and sizes
// are spread so the classes overlap a little in each single feature.
TrafficSpec default_ddos() {
  constexpr double kStop = 50.0;
  const double legit_rates[] = {5.0, 10.0, 20.0, 40.0, 80.0, 15.0};
  const double attack_rates[] = {120.0, 250.0, 500.0, 1000.0};
  TrafficSpec spec;
  for (std::uint32_t i = 0; i < 24; ++i) {
    FlowSpec f;
    f.src = EndpointAddr{i + 1};
    f.dst = EndpointAddr{(i + 7) % 24 + 1};
    f.kind = TrafficLabel::Legit;
    f.segments = {RateSegment{0.0, kStop, legit_rates[i % 6]}};
    f.size = (i % 3 == 2) ? SizeDist::uniform(200, 1500) : SizeDist::uniform(400, 1200);
    f.arrival = ArrivalProcess::Poisson;
    spec.flows.push_back(f);
  }
  for (std::uint32_t i = 0; i < 24; ++i) {
    FlowSpec f;
    f.src = EndpointAddr{101 + i};
    f.dst = EndpointAddr{i % 3 + 1};
    f.kind = TrafficLabel::Attack;
    f.segments = {RateSegment{0.0, kStop, attack_rates[i % 4]}};
    f.size = (i % 2 == 0) ? SizeDist::fixed(100) : SizeDist::uniform(60, 160);
    f.arrival = (i % 3 == 0) ? ArrivalProcess::Uniform : ArrivalProcess::Poisson;
    spec.flows.push_back(f);
  }
  return spec;
}

}  // namespace

std::optional<TrafficSpec> traffic_preset(std::string_view name) {
  if (name == "default-ddos") return default_ddos();
  return std::nullopt;
}

std::vector<std::string> traffic_preset_names() { return {"default-ddos"}; }

}  // namespace rapidlearn
