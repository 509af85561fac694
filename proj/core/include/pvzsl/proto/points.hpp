// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/proto/class_set.hpp"

namespace pvzsl {

/// Visual feature rows with one class label per row.
struct LabeledPoints {
  Matrix x;
  std::vector<ClassId> y;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
};

/// Externally synthesized target-class features (labels must be target ids).
using GeneratedSet = LabeledPoints;

}  // namespace pvzsl
