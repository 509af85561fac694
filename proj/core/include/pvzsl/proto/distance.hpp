// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "pvzsl/proto/class_set.hpp"

namespace pvzsl {

enum class DistanceKind { euclidean, cosine, dot, asym_dot };

std::string_view to_string(DistanceKind kind) noexcept;
/// Throws ValidationError on an unknown name.
DistanceKind parse_distance_kind(std::string_view name);

/// Which compatibility score drives the softmax. For asym_dot, prototypes of source classes are
/// scaled by m1 and prototypes of target classes by m2; the factors are ignored otherwise.
struct DistanceSpec {
  DistanceKind kind = DistanceKind::asym_dot;
  double m1 = 0.5;
  double m2 = 1.0;

  void validate() const;
  double factor(Side side) const noexcept { return side == Side::source ? m1 : m2; }

  bool operator==(const DistanceSpec&) const = default;
};

/// Softmax logit (negated distance); higher means closer.
///   euclidean: -|x - z|^2     cosine: cos(x, z)     dot: x·z
///   asym_dot:  max(m·(x·z), 0) with m chosen by `side`
/// Throws NumericError for a zero-norm vector under cosine, DimensionError on length mismatch.
double score(std::span<const double> x, std::span<const double> z, const DistanceSpec& spec,
             Side side);

/// Accumulates upstream·∂score/∂x into dx (skipped when dx is empty) and upstream·∂score/∂z
/// into dz. The asym_dot clamp uses the zero subgradient at the kink.
void score_backward(std::span<const double> x, std::span<const double> z,
                    const DistanceSpec& spec, Side side, double upstream, std::span<double> dx,
                    std::span<double> dz);

}  // namespace pvzsl
