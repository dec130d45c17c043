#pragma once

// Small text helpers shared by the line-oriented file formats (trace CSV,
// event trace, model file). Doubles are written in shortest round-trip form
// so that parse(format(x)) == x bit for bit.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rapidlearn::text {

std::string format_double(double value);

// 17 significant digits, the fixed-width form used by the model file.
std::string format_double17(double value);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace rapidlearn::text
