// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/proto/embed_net.hpp"

#include <atomic>
#include <string>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

namespace {

std::uint64_t next_net_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

EmbedNet::EmbedNet(std::size_t input_dim, std::size_t output_dim, const EmbedNetConfig& cfg)
    : w1("layer1.weight", input_dim, cfg.hidden),
      b1("layer1.bias", 1, cfg.hidden),
      w2("layer2.weight", cfg.hidden, output_dim),
      b2("layer2.bias", 1, output_dim),
      cfg_(cfg),
      id_(next_net_id()) {
  if (input_dim == 0 || output_dim == 0 || cfg.hidden == 0) {
    throw DimensionError("EmbedNet: all dimensions must be positive");
  }
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) {
    throw ValidationError("EmbedNet: dropout rate must be in [0, 1)");
  }
}

EmbedNet::EmbedNet(const EmbedNet& other)
    : w1(other.w1),
      b1(other.b1),
      w2(other.w2),
      b2(other.b2),
      cfg_(other.cfg_),
      id_(next_net_id()),
      generation_(0) {}

EmbedNet& EmbedNet::operator=(const EmbedNet& other) {
  if (this != &other) {
    w1 = other.w1;
    b1 = other.b1;
    w2 = other.w2;
    b2 = other.b2;
    cfg_ = other.cfg_;
    ++generation_;
  }
  return *this;
}

void EmbedNet::initialize(Rng& rng) {
  init_glorot_uniform(w1.value, rng);
  init_glorot_uniform(w2.value, rng);
  for (ParamBlock* p : params()) {
    if (p == &b1 || p == &b2) p->value.fill(0.0);
    p->grad.fill(0.0);
    p->adam_m.fill(0.0);
    p->adam_v.fill(0.0);
  }
  ++generation_;
}

void EmbedNet::zero_grad() {
  for (ParamBlock* p : params()) p->zero_grad();
}

void EmbedNet::step(const AdamConfig& adam, std::uint64_t t) {
  auto blocks = params();
  adam_step(blocks, adam, t);
  ++generation_;
}

ForwardCache forward_layers(const EmbedNet& net, const Matrix& v, bool train_mode, Rng& rng) {
  if (v.cols() != net.input_dim()) {
    throw DimensionError("forward_layers: attributes have " + std::to_string(v.cols()) +
                         " columns, net expects " + std::to_string(net.input_dim()));
  }
  ForwardCache cache;
  cache.net_id = net.id();
  cache.net_generation = net.generation();
  cache.train_mode = train_mode;
  cache.input = v;
  cache.pre1 = affine_forward(v, net.w1.value, net.b1.value);
  cache.hidden = leaky_relu_forward(cache.pre1, net.config().leaky_slope);
  if (train_mode && net.config().dropout_rate > 0.0) {
    cache.mask = dropout_mask(cache.hidden.rows(), cache.hidden.cols(),
                              net.config().dropout_rate, rng);
    cache.hidden = hadamard(cache.hidden, cache.mask);
  }
  cache.output = tanh_forward(affine_forward(cache.hidden, net.w2.value, net.b2.value));
  return cache;
}

ForwardCache forward_layers(const EmbedNet& net, const Matrix& v) {
  Rng unused(0);
  return forward_layers(net, v, false, unused);
}

void backward_layers(EmbedNet& net, const ForwardCache& cache, const Matrix& dz) {
  if (cache.net_id != net.id()) {
    throw ValidationError("backward_layers: cache was produced by a different network");
  }
  if (cache.net_generation != net.generation()) {
    throw ValidationError("backward_layers: stale cache (parameters changed since forward)");
  }
  if (!dz.same_shape(cache.output)) {
    throw DimensionError("backward_layers: dZ " + dz.shape_string() + " vs output " +
                         cache.output.shape_string());
  }
  Matrix d_pre2 = tanh_backward(cache.output, dz);
  Matrix d_hidden = affine_backward(cache.hidden, net.w2.value, d_pre2, net.w2.grad, net.b2.grad);
  if (!cache.mask.empty()) d_hidden = hadamard(d_hidden, cache.mask);
  Matrix d_pre1 = leaky_relu_backward(cache.pre1, d_hidden, net.config().leaky_slope);
  affine_backward(cache.input, net.w1.value, d_pre1, net.w1.grad, net.b1.grad);
}

Matrix embed_prototypes(const EmbedNet& net, const Matrix& v, bool train_mode, Rng& rng) {
  return forward_layers(net, v, train_mode, rng).output;
}

Matrix embed_prototypes(const EmbedNet& net, const Matrix& v) {
  return forward_layers(net, v).output;
}

}  // namespace pvzsl
