// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/proto/prob_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

double ProbVector::prob_of(ClassId id) const {
  auto it = std::find(class_ids.begin(), class_ids.end(), id);
  if (it == class_ids.end()) {
    throw ValidationError("class id " + std::to_string(id) + " not in probability vector");
  }
  return probs[static_cast<std::size_t>(it - class_ids.begin())];
}

void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) throw ValidationError("softmax over an empty set");
  const double shift = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - shift);
    total += v;
  }
  for (double& v : logits) v /= total;
}

namespace {

void require_coverage(const Matrix& z, const ClassSet& classes, std::size_t point_dim) {
  if (z.rows() < classes.ids().back()) {
    throw DimensionError("prototype matrix has " + std::to_string(z.rows()) +
                         " rows but class id " + std::to_string(classes.ids().back()) +
                         " was requested");
  }
  if (z.cols() != point_dim) {
    throw DimensionError("points have dimension " + std::to_string(point_dim) +
                         ", prototypes " + std::to_string(z.cols()));
  }
}

}  // namespace

std::vector<double> class_scores(std::span<const double> x, const Matrix& z,
                                 const ClassSet& classes, const DistanceSpec& spec) {
  require_coverage(z, classes, x.size());
  std::vector<double> s(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    s[k] = score(x, z.row(ClassLayout::row_of(classes.id(k))), spec, classes.side_of(k));
  }
  return s;
}

ProbVector pv(std::span<const double> x, const Matrix& z, const ClassSet& classes,
              const DistanceSpec& spec) {
  ProbVector out;
  out.class_ids = classes.ids();
  out.probs = class_scores(x, z, classes, spec);
  softmax_inplace(out.probs);
  return out;
}

ClassId predict(std::span<const double> x, const Matrix& z, const ClassSet& classes,
                const DistanceSpec& spec) {
  const auto s = class_scores(x, z, classes, spec);
  // ids are sorted ascending, so the first maximum is the lowest id.
  const auto best = std::max_element(s.begin(), s.end());
  return classes.id(static_cast<std::size_t>(best - s.begin()));
}

Matrix score_matrix(const Matrix& x, const Matrix& z, const ClassSet& classes,
                    const DistanceSpec& spec) {
  require_coverage(z, classes, x.cols());
  Matrix out(x.rows(), classes.size());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    auto xr = x.row(n);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      out(n, k) = score(xr, z.row(ClassLayout::row_of(classes.id(k))), spec, classes.side_of(k));
    }
  }
  return out;
}

Matrix pv_matrix(const Matrix& x, const Matrix& z, const ClassSet& classes,
                 const DistanceSpec& spec) {
  Matrix p = score_matrix(x, z, classes, spec);
  for (std::size_t n = 0; n < p.rows(); ++n) softmax_inplace(p.row(n));
  return p;
}

std::vector<ClassId> predict_batch(const Matrix& x, const Matrix& z, const ClassSet& classes,
                                   const DistanceSpec& spec) {
  const Matrix s = score_matrix(x, z, classes, spec);
  std::vector<ClassId> out(x.rows());
  for (std::size_t n = 0; n < s.rows(); ++n) {
    auto r = s.row(n);
    out[n] = classes.id(static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin()));
  }
  return out;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs) {
  if (!probs.same_shape(d_probs)) throw DimensionError("softmax_backward: shape mismatch");
  Matrix out(probs.rows(), probs.cols());
  for (std::size_t n = 0; n < probs.rows(); ++n) {
    auto p = probs.row(n);
    auto g = d_probs.row(n);
    const double inner = dot(p, g);
    auto o = out.row(n);
    for (std::size_t k = 0; k < p.size(); ++k) o[k] = p[k] * (g[k] - inner);
  }
  return out;
}

void score_matrix_backward(const Matrix& x, const Matrix& z, const ClassSet& classes,
                           const DistanceSpec& spec, const Matrix& d_scores, Matrix& dz,
                           Matrix* dx) {
  require_coverage(z, classes, x.cols());
  if (d_scores.rows() != x.rows() || d_scores.cols() != classes.size() || !dz.same_shape(z)) {
    throw DimensionError("score_matrix_backward: shape mismatch");
  }
  if (dx != nullptr && !dx->same_shape(x)) throw DimensionError("score_matrix_backward: dX shape");
  for (std::size_t n = 0; n < x.rows(); ++n) {
    auto xr = x.row(n);
    std::span<double> dxr = dx != nullptr ? dx->row(n) : std::span<double>{};
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const double g = d_scores(n, k);
      if (g == 0.0) continue;
      const std::size_t r = ClassLayout::row_of(classes.id(k));
      score_backward(xr, z.row(r), spec, classes.side_of(k), g, dxr, dz.row(r));
    }
  }
}

}  // namespace pvzsl
