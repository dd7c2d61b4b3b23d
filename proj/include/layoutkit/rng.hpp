// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace layoutkit {

/// Deterministic counter-based generator (SplitMix64 core). We do not use
/// <random> distributions because their output is implementation-defined;
/// every stream produced here is bit-stable across platforms and compilers.
///
/// Seed-splitting scheme: each pipeline stage derives its own independent
/// stream as `Rng(root_seed, stage_name)`, where the stage name is hashed
/// with FNV-1a and mixed into the root seed. Re-running a single stage with
/// the same root seed therefore reproduces that stage's stream exactly,
/// regardless of what other stages consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Decorrelate trivially related seeds (0, 1, 2, ...).
    next_u64();
    next_u64();
  }

  Rng(std::uint64_t root_seed, std::string_view stage)
      : Rng(root_seed ^ fnv1a(stage)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  /// Standard normal via Box-Muller (two uniforms per pair, cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace layoutkit
