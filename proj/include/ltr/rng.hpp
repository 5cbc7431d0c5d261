#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

// Deterministic hashing and random number generation. Everything that needs
// randomness in this library draws from these primitives so that a fixed seed
// reproduces identical bytes on disk, run after run.

namespace ltr {

inline constexpr std::uint64_t kFnvBasis = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ull;

// 64-bit FNV-1a over raw bytes. Chainable via the `h` parameter.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvBasis) {
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// Feeds a 64-bit value into an FNV-1a chain, little-endian byte order.
inline std::uint64_t fnv1a_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffull;
    h *= kFnvPrime;
  }
  return h;
}

// SplitMix64: tiny, portable, and plenty for synthetic data and init draws.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of mantissa.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Bounded draw in [0, n). Multiply-shift; bias is ~n/2^64, irrelevant here.
  std::uint64_t below(std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
  }
};

template <class T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

// Key for an independent RNG stream addressed by (seed, unit, step). Episodes
// seeded this way do not depend on how many draws earlier episodes consumed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t unit,
                                 std::uint64_t step = 0) {
  std::uint64_t h = fnv1a_mix(kFnvBasis, seed);
  h = fnv1a_mix(h, unit);
  h = fnv1a_mix(h, step);
  return h;
}

}  // namespace ltr
