#pragma once

#include <cstdint>
#include <random>

namespace christoffel {

using Rng = std::mt19937_64;

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return std::generate_canonical<double, 53>(rng);
}

/// Generator for repetition `rep` of an experiment seeded with `seed`.
inline Rng repetition_rng(std::uint64_t seed, std::uint64_t rep) { return Rng(seed ^ rep); }

}  // namespace christoffel
