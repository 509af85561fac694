// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace pvzsl {

/// Portable pseudo-random stream: the 64-bit seed is expanded by splitmix64 into the
/// 256-bit state of xoshiro256**. Every derived quantity (uniforms, normals, gammas,
/// shuffles) is computed here from raw 64-bit outputs, so a seed reproduces the same
/// values on every platform. std:: distributions are deliberately not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via the Box-Muller transform (one value per call, the pair is cached).
  double normal() noexcept;
  double normal(double mean, double sigma) noexcept { return mean + sigma * normal(); }
  /// Gamma(shape, 1) by Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent stream keyed by (seed, stream_id); does not advance this generator.
  Rng derive(std::uint64_t stream_id) const noexcept;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace pvzsl
