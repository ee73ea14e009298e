#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rqa::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// One root seed, many independent streams. Every random decision in the
// workbench pulls its seed through here: root seed, a role string, and up
// to three lane indices.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view role,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t s = mix(root ^ fnv1a64(role));
  s = mix(s ^ a);
  s = mix(s ^ b);
  s = mix(s ^ c);
  return s;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t r = gen();
    if (r >= threshold) return r % n;
  }
}

// Uniform integer in [lo, hi], inclusive.
inline std::int64_t uniform_int(std::mt19937_64& gen, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(bounded(gen, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Uniform double in [lo, hi).
inline double uniform_real(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

}  // namespace rqa::rng
