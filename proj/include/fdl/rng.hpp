#pragma once

#include <cstdint>

namespace fdl {

// Counter-based generator: value i of stream s under seed k is a pure
// function mix(k, s, i), so parallel consumers can draw independently
// without shared state and replays are exact.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t word(std::uint64_t counter) const {
    std::uint64_t x = seed_ ^ mix_(stream_ + 0x9e3779b97f4a7c15ull);
    return mix_(x + counter * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull);
  }

  // uniform in [0, 1)
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix_(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace fdl
