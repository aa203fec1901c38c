#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace normlab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer: a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for trial `index` under `master`:
///   mix64(master + 0x9e3779b97f4a7c15 * (index + 1))   (mod 2^64)
/// The multiplier is odd and mix64 is bijective, so the map is injective in
/// `index` for a fixed master and injective in `master` for a fixed index.
constexpr std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + 0x9e3779b97f4a7c15ULL * (index + 1));
}

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = normal(rng);
  return out;
}

}  // namespace normlab
