#pragma once

// Shared test inputs.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "rapidlearn/svc.hpp"

namespace fixtures {

inline std::filesystem::path source_dir() { return RAPIDLEARN_SOURCE_DIR; }

// 2..8 points, 2..4 features, both classes present.
inline rapidlearn::Dataset small_dataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const std::size_t n = 2 + rng() % 7;
  const std::size_t d = 2 + rng() % 3;
  rapidlearn::Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    int y = (i == 0) ? 1 : (i == 1) ? -1 : (rng() % 2 ? 1 : -1);
    std::vector<double> x(d);
    for (auto& v : x) v = 4.0 * unit() - 2.0 + 0.7 * y;
    data.rows.push_back({std::move(x), y});
  }
  return data;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("rapidlearn-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace fixtures
