#pragma once

#include <cstdint>
#include <random>

namespace skillsim {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive well-mixed child seeds from a master
// seed plus stream indices. Reproducible across platforms.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(master ^ 0x243f6a8885a308d3ULL) + mix_seed(a) + 3 * mix_seed(b));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return Rng(derive_seed(master, a, b));
}

}  // namespace skillsim
