// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace lehopp {

/// splitmix64. Used everywhere a seeded stream is needed so outputs are
/// identical across platforms and standard-library versions.
class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n); n must be positive.
  uint64_t next_below(uint64_t n) {
    // Rejection sampling keeps the draw unbiased without 128-bit arithmetic.
    const uint64_t limit = n * (UINT64_MAX / n);
    uint64_t v = next();
    while (v >= limit) {
      v = next();
    }
    return v % n;
  }

  template <typename T> void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  uint64_t state_;
};

/// Stateless mix of up to four words into a fresh 64-bit value; used to
/// derive independent sub-stream seeds from one run seed.
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  uint64_t h = a * 0x9e3779b97f4a7c15ULL;
  h ^= b + 0xbf58476d1ce4e5b9ULL + (h << 6) + (h >> 2);
  h ^= c + 0x94d049bb133111ebULL + (h << 6) + (h >> 2);
  h ^= d + 0xd6e8feb86659fd93ULL + (h << 6) + (h >> 2);
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

/// Same mix mapped to a uniform double in [0, 1); the lattice hash behind
/// the value-noise texture.
inline double hash_to_unit(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  return static_cast<double>(mix_seed(a, b, c, d) >> 11) * 0x1.0p-53;
}

} // namespace lehopp
