#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ness {

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the substream addressed by a master seed and a tuple of counters.
/// Streams with different keys are independent of each other and of scheduling.
inline std::uint64_t substream_seed(std::uint64_t master, std::initializer_list<std::int64_t> keys) {
  std::uint64_t h = mix64(master);
  for (std::int64_t k : keys) h = mix64(h ^ static_cast<std::uint64_t>(k));
  return h;
}

using Rng = std::mt19937_64;

}  // namespace ness
