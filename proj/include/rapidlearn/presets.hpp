#pragma once

// Built-in traffic specs for gen-trace.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rapidlearn/traffic.hpp"

namespace rapidlearn {

std::optional<TrafficSpec> traffic_preset(std::string_view name);
std::vector<std::string> traffic_preset_names();

}  // namespace rapidlearn
