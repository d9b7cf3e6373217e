// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace openstate::util {

// Uniform draw in [0, n) by rejection. Unlike std::uniform_int_distribution
// the result is identical across standard library implementations.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// FNV-1a over 64-bit little-endian words.
inline std::uint64_t fnv1a(std::span<const std::uint64_t> words) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : words) {
    for (int i = 0; i < 8; ++i) {
      h ^= (w >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

// Derives an independent seed for a sub-component (switch, controller).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  const std::uint64_t words[2] = {seed, salt};
  return fnv1a(words);
}

}  // namespace openstate::util
