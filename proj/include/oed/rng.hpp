#ifndef OED_RNG_HPP
#define OED_RNG_HPP

#include <cstdint>
#include <random>

namespace oed {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; spreads nearby integers across the full 64-bit range.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed for substream `k` (replicate, restart, sweep point...)
/// of `base`. Children of distinct (base, k) pairs are decorrelated, so
/// replicates can run in any order, or concurrently, without sharing state.
constexpr std::uint64_t child_seed(std::uint64_t base, std::uint64_t k) noexcept {
  return mix64(base ^ mix64(k + 0x9e3779b97f4a7c15ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace oed

#endif  // OED_RNG_HPP
