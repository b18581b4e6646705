#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cardsolver {

// splitmix64; used to derive independent child seeds from one root seed so
// that parallel schedules cannot change which stream a component consumes.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view component, std::uint64_t index = 0) {
  std::uint64_t h = root;
  for (char c : component) h = mix_seed(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  return mix_seed(h ^ index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view component, std::uint64_t index = 0) {
  return Rng(derive_seed(root, component, index));
}

}  // namespace cardsolver
