// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/proto/class_set.hpp"
#include "pvzsl/proto/distance.hpp"

namespace pvzsl {

/// Soft assignment of one point over an ordered set of class prototypes.
struct ProbVector {
  std::vector<ClassId> class_ids;
  std::vector<double> probs;

  double prob_of(ClassId id) const;
};

/// In-place softmax with max-shift; the input holds logits.
void softmax_inplace(std::span<double> logits);

/// Logits of x against each prototype row Z[id-1] for id in `classes`; each logit uses the
/// factor of its own class side (m1 for sources, m2 for targets) under asym_dot.
std::vector<double> class_scores(std::span<const double> x, const Matrix& z,
                                 const ClassSet& classes, const DistanceSpec& spec);

ProbVector pv(std::span<const double> x, const Matrix& z, const ClassSet& classes,
              const DistanceSpec& spec);

/// argmax of the PV over `classes`; exact ties go to the lowest class id.
ClassId predict(std::span<const double> x, const Matrix& z, const ClassSet& classes,
                const DistanceSpec& spec);

// Batched forms. Rows of `x` are points; columns of the results follow classes.ids().

Matrix score_matrix(const Matrix& x, const Matrix& z, const ClassSet& classes,
                    const DistanceSpec& spec);
Matrix pv_matrix(const Matrix& x, const Matrix& z, const ClassSet& classes,
                 const DistanceSpec& spec);
std::vector<ClassId> predict_batch(const Matrix& x, const Matrix& z, const ClassSet& classes,
                                   const DistanceSpec& spec);

/// Given row-wise softmax outputs P and an upstream dL/dP, returns dL/dlogits.
Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs);

/// Scatters dL/dlogits (N×K) into dZ (rows indexed by class id - 1) and, when `dx` is
/// non-null, into dX.
void score_matrix_backward(const Matrix& x, const Matrix& z, const ClassSet& classes,
                           const DistanceSpec& spec, const Matrix& d_scores, Matrix& dz,
                           Matrix* dx = nullptr);

}  // namespace pvzsl
