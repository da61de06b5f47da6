// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "hoi/geometry.hpp"

namespace hoi {

// All randomized operations in this library are pure functions of
// (inputs, seed). mt19937_64 is fully specified by the standard; the
// mappings below avoid std::uniform_real_distribution, whose output is
// implementation-defined, so streams are reproducible bit-for-bit.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent substream seed for (seed, index) pairs, e.g. per-clip streams
/// in batch augmentation.
inline std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51a2b3c4d5e6f708ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform in [-range, range).
  double symmetric(double range) { return uniform(-range, range); }

  std::uint64_t bits() { return gen_(); }

  /// Uniform direction on the unit sphere (rejection-free, via angles).
  Vec3 unitVector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(r * std::cos(phi), r * std::sin(phi), z);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hoi
