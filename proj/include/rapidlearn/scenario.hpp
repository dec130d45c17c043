#pragma once

// Scenario configuration: one TOML document with [sim], [topology],
// [traffic], [monitor] and [controller] sections. See
// presets/two-domain.toml for the annotated schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "rapidlearn/controller.hpp"
#include "rapidlearn/monitor.hpp"
#include "rapidlearn/net_model.hpp"
#include "rapidlearn/traffic.hpp"

namespace rapidlearn {

struct Latencies {
  double host_link = 0.0005;
  double switch_link = 0.001;
  double monitor_link = 0.0001;
  double controller_link = 0.002;
};

struct ControllerSettings {
  std::optional<std::uint32_t> quorum;  // unset: majority of the domain's monitors
  double vote_window = 10.0;
  BlockScope block_scope = BlockScope::AllSwitches;

  ControllerConfig for_domain(std::size_t monitors) const;
};

struct ScenarioConfig {
  TopologySpec topology;
  TrafficSpec traffic;
  MonitorConfig monitor;
  ControllerSettings controller;
  std::filesystem::path model_path;
  std::uint64_t seed = 42;
  double t_end = 30.0;
  double drain = 1.0;  // run time after t_end so in-flight packets land
  double duplicate_control_prob = 0.0;
  Latencies latencies;
};

// Throws Error(InvalidConfig) with a field path on any problem. Relative
// model paths resolve against `base_dir`.
ScenarioConfig parse_scenario(std::string_view toml_text, const std::filesystem::path& base_dir,
                              const std::string& source = "<scenario>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Checks cross-section invariants (quorum vs. monitors, latencies, traffic
// endpoints). Called by the parsers; exposed for programmatic configs.
void validate_scenario(const ScenarioConfig& config);

// A standalone traffic document: only [traffic], endpoints as addresses.
TrafficSpec parse_traffic_spec(std::string_view toml_text, const std::string& source = "<traffic>");

}  // namespace rapidlearn
