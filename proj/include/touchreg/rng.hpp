#pragma once

#include <cstdint>

#include <Eigen/Geometry>

namespace touchreg {

// SplitMix64 (Steele, Lea & Flood): a counter-based generator whose output
// depends only on the seed and the draw index, so seeded runs are portable
// across compilers and standard libraries. The distributions below are
// implemented here for the same reason (std:: distributions are
// implementation-defined).
//
// Stream version 1. Changing any of the derivations below changes every
// synthetic fixture and must bump kRngStreamVersion.
inline constexpr int kRngStreamVersion = 1;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Consumes exactly two draws per call.
  double normal();

  // Independent child stream; advances this stream by one draw.
  SplitMix64 split() { return SplitMix64(next() ^ 0x6A09E667F3BCC909ULL); }

 private:
  std::uint64_t state_;
};

// Uniformly distributed rotation (Shoemake's subgroup algorithm).
Eigen::Quaterniond random_rotation(SplitMix64& rng);

// Uniformly distributed unit vector in R^3.
Eigen::Vector3d random_unit_vector(SplitMix64& rng);

}  // namespace touchreg
