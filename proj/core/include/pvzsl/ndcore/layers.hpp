// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/ndcore/rng.hpp"

namespace pvzsl {

/// A trainable tensor with its gradient accumulator and Adam moments (all the same shape).
struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;

  ParamBlock() = default;
  ParamBlock(std::string block_name, std::size_t rows, std::size_t cols);

  void zero_grad() { grad.fill(0.0); }
  bool consistent() const noexcept {
    return value.same_shape(grad) && value.same_shape(adam_m) && value.same_shape(adam_v);
  }
};

// Layer primitives. Each *_backward returns the gradient with respect to the layer input and,
// for parameterized layers, accumulates (+=) into the supplied gradient buffers.

/// y = x·W + b, with b a 1×out row broadcast over the rows of x.
Matrix affine_forward(const Matrix& x, const Matrix& w, const Matrix& b);
Matrix affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& grad_w,
                       Matrix& grad_b);

Matrix leaky_relu_forward(const Matrix& x, double slope);
Matrix leaky_relu_backward(const Matrix& x, const Matrix& dy, double slope);

Matrix tanh_forward(const Matrix& x);
/// Takes the forward *output* y = tanh(x).
Matrix tanh_backward(const Matrix& y, const Matrix& dy);

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else 1/(1-rate).
Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Uniform in ±sqrt(6/(fan_in+fan_out)) with fan_in = rows, fan_out = cols.
void init_glorot_uniform(Matrix& w, Rng& rng);

}  // namespace pvzsl
