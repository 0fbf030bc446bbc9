#pragma once

#include <cstdint>

namespace qrc {

// Stateless counter-based generator: value(i) is a pure function of
// (seed, stream, i), so results do not depend on call order, thread
// scheduling or the standard library's distribution implementations.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

 private:
  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace qrc
