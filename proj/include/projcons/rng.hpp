#pragma once

#include <cstdint>
#include <random>

namespace projcons {

// All randomness in the library flows through mt19937_64 engines seeded via
// the splitmix64 chain below.  Distribution mapping is done by hand (not via
// std::uniform_*_distribution, whose output is implementation-defined) so
// that identical seeds give identical streams on every platform.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent sub-seed from (seed, stream).  Used to give each
// consumer (problem generator, schedule, initial states, ...) its own stream
// from one top-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xD6E8FEB86659FD93ull + 0x2545F4914F6CDD1Dull;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9E3779B97F4A7C15ull);
}

// Fixed stream tags; documented in the README's determinism section.
inline constexpr std::uint64_t kStreamProblem = 1;
inline constexpr std::uint64_t kStreamSchedule = 2;
inline constexpr std::uint64_t kStreamInit = 3;
inline constexpr std::uint64_t kStreamEvents = 4;
inline constexpr std::uint64_t kStreamRate = 5;

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(seed, stream));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform double in [-1, 1).
inline double uniform_signed(std::mt19937_64& rng) {
  return 2.0 * uniform01(rng) - 1.0;
}

// Uniform integer in [0, n) by rejection; n must be positive.
inline std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace projcons
