#pragma once

#include <cstdint>
#include <random>

namespace maktd {

using Rng = std::mt19937_64;

/// Order-independent 64-bit mix of two words (splitmix64 finalizer over a
/// combined key). Used to derive per-run and per-agent seeds so that
/// parallel runs never depend on scheduling order.
constexpr std::uint64_t hash64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + (b ^ 0xD1B54A32D192ED03ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  z += b * 0xC2B2AE3D27D4EB4FULL;
  z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
  return z ^ (z >> 33);
}

/// Uniform index in [0, n). Avoids std::uniform_int_distribution so the
/// stream is identical across standard library implementations.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace maktd
