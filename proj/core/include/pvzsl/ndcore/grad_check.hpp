// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pvzsl/ndcore/layers.hpp"

namespace pvzsl {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;   // at worst_index
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  bool all_passed() const;
  double worst() const;
  std::string summary() const;
};

struct GradCheckOptions {
  double h = 1e-5;
  double tol = 1e-4;
  /// Denominator floor for the relative error |a - n| / max(|a|, |n|, floor), so that
  /// entries whose true gradient is ~0 are judged on an absolute scale.
  double scale_floor = 1e-6;
};

/// Compares the analytic gradients already stored in each block's `grad` buffer against
/// central finite differences of `loss`. `loss` must be deterministic and must not touch
/// the grad buffers. Parameter values are restored exactly afterwards.
GradCheckReport grad_check(std::span<ParamBlock* const> params, const std::function<double()>& loss,
                           const GradCheckOptions& opts = {});

}  // namespace pvzsl
