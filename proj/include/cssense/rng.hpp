#pragma once

#include <cstdint>
#include <random>

namespace cssense {

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

constexpr Seed splitmix64(Seed x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `index` of `base`. Independent of evaluation order,
/// so parallel trials reproduce the serial run.
constexpr Seed derive_seed(Seed base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(Seed seed) { return Rng(splitmix64(seed)); }

}  // namespace cssense
