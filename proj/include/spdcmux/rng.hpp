#pragma once

#include <cstdint>
#include <random>

namespace spdcmux {

// 64-bit Mersenne Twister. Output sequence is fixed by the C++ standard, so
// runs are reproducible across compilers and platforms.
using Engine = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent per-point seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for the index-th child stream of a master seed. Depends only on
// (master, index), never on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) built from the top 53 bits of one draw.
// Distribution objects from <random> are implementation-defined; this is not.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace spdcmux
