#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace request {

using Rng = std::mt19937_64;

/// Splits a root seed into an independent stream seed identified by `label`.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Requires n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace request
