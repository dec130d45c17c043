#pragma once

// Seeded randomness with platform-independent output. std::mt19937_64's raw
// sequence is fixed by the standard, the std:: distributions are not, so
// every draw is derived from raw 64-bit outputs here.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rapidlearn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for sub-component `stream` of a run seeded with `seed`.
  static Rng derived(std::uint64_t seed, std::uint64_t stream) { return Rng(splitmix64(seed ^ splitmix64(stream + 1))); }

  std::uint64_t next() { return engine_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // [lo, hi], inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) return lo + engine_();
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return lo + v % span;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_int(0, i - 1)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rapidlearn
