#pragma once

// Deterministic seed splitting. Every draw gets its own stream derived from the
// run seed and its coordinates, so results do not depend on scheduling.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rephrasecal {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(base);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Uniform on the open interval (0, 1); 53 random bits, never 0 or 1.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unbiased index in [0, n) via rejection; identical across standard libraries,
/// unlike std::uniform_int_distribution.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Salts separating the random streams used inside one draw.
enum class Stream : std::uint64_t { kRephrase = 1, kAnswer = 2, kHint = 3, kWorld = 4 };

}  // namespace rephrasecal
