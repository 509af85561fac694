// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "pvzsl/ndcore/layers.hpp"

namespace pvzsl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

/// One bias-corrected Adam update at step `t` (1-based), then zeroes every gradient buffer.
/// Throws NumericError naming the block if any gradient is non-finite; in that case no
/// parameter is modified.
void adam_step(std::span<ParamBlock* const> params, const AdamConfig& cfg, std::uint64_t t);

}  // namespace pvzsl
