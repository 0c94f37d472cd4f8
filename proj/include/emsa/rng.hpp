#pragma once

#include <cstdint>

#include "emsa/geometry.hpp"

// Counter-based random stream: every draw is a pure function of
// (seed, sample index, site), so Monte Carlo loops can run in any order and
// on any number of threads with identical results.

namespace emsa {

inline std::uint64_t mix64(std::uint64_t z) {
  // SplitMix64 finalizer.
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t site_key(std::uint64_t seed, std::uint64_t sample_index, const Site& site) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ sample_index);
  for (int c : site) {
    // Zigzag so negative coordinates stay distinct from positive ones.
    std::uint64_t u = static_cast<std::uint64_t>((c << 1) ^ (c >> 31));
    h = mix64(h ^ u);
  }
  return h;
}

// Uniform double in [0,1) from a 64-bit key.
inline double key_to_unit(std::uint64_t key) {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

inline double unit_uniform(std::uint64_t seed, std::uint64_t sample_index, const Site& site) {
  return key_to_unit(mix64(site_key(seed, sample_index, site)));
}

}  // namespace emsa
