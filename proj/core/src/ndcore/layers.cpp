// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/ndcore/layers.hpp"

#include <cmath>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

ParamBlock::ParamBlock(std::string block_name, std::size_t rows, std::size_t cols)
    : name(std::move(block_name)),
      value(rows, cols),
      grad(rows, cols),
      adam_m(rows, cols),
      adam_v(rows, cols) {}

Matrix affine_forward(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("affine: bias " + b.shape_string() + " for weight " + w.shape_string());
  }
  Matrix y = matmul(x, w);
  auto bias = b.row(0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
  return y;
}

Matrix affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& grad_w,
                       Matrix& grad_b) {
  if (dy.rows() != x.rows() || dy.cols() != w.cols() || !grad_w.same_shape(w) ||
      grad_b.rows() != 1 || grad_b.cols() != w.cols()) {
    throw DimensionError("affine_backward: dy " + dy.shape_string() + ", x " + x.shape_string() +
                         ", w " + w.shape_string());
  }
  axpy(1.0, matmul_tn(x, dy), grad_w);
  auto gb = grad_b.row(0);
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    auto r = dy.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
  }
  return matmul_nt(dy, w);
}

Matrix leaky_relu_forward(const Matrix& x, double slope) {
  Matrix y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : slope * v;
  return y;
}

Matrix leaky_relu_backward(const Matrix& x, const Matrix& dy, double slope) {
  if (!x.same_shape(dy)) throw DimensionError("leaky_relu_backward: shape mismatch");
  Matrix dx = dy;
  auto xs = x.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= xs[i] > 0.0 ? 1.0 : slope;
  return dx;
}

Matrix tanh_forward(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values()) v = std::tanh(v);
  return y;
}

Matrix tanh_backward(const Matrix& y, const Matrix& dy) {
  if (!y.same_shape(dy)) throw DimensionError("tanh_backward: shape mismatch");
  Matrix dx = dy;
  auto ys = y.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - ys[i] * ys[i];
  return dx;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  Matrix mask(rows, cols, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& v : mask.values()) v = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("hadamard: " + a.shape_string() + " vs " + b.shape_string());
  }
  Matrix out = a;
  auto bs = b.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bs[i];
  return out;
}

void init_glorot_uniform(Matrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
}

}  // namespace pvzsl
