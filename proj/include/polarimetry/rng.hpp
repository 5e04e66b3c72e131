#pragma once

#include <cstdint>
#include <random>

namespace polarimetry {

using Rng = std::mt19937_64;

/// One SplitMix64 scrambling step.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive a decorrelated stream seed from a base seed and up to two indices.
/// Used to give every Monte Carlo trial its own engine, so results do not
/// depend on how trials are scheduled across workers.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

/// Uniform double in [0, 1) built from the top 53 bits of the engine output.
/// Unlike std::uniform_real_distribution, the mapping is fixed by this
/// library, so streams are reproducible across standard library versions.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace polarimetry
