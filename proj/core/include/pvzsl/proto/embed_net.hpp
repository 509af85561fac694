// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include "pvzsl/ndcore/adam.hpp"
#include "pvzsl/ndcore/layers.hpp"
#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/ndcore/rng.hpp"

namespace pvzsl {

struct EmbedNetConfig {
  std::size_t hidden = 2048;
  double dropout_rate = 0.5;
  double leaky_slope = 0.01;

  bool operator==(const EmbedNetConfig&) const = default;
};

/// The attribute-to-visual compatibility network:
///   Z = tanh( dropout(leaky_relu(V·W1 + b1)) · W2 + b2 )
/// mapping C×Q class attributes to C×P prototypes in the visual feature space.
class EmbedNet {
 public:
  EmbedNet(std::size_t input_dim, std::size_t output_dim, const EmbedNetConfig& cfg = {});
  EmbedNet(const EmbedNet& other);
  EmbedNet& operator=(const EmbedNet& other);
  EmbedNet(EmbedNet&&) noexcept = default;
  EmbedNet& operator=(EmbedNet&&) noexcept = default;

  /// Glorot-uniform weights, zero biases, zero optimizer state.
  void initialize(Rng& rng);

  std::size_t input_dim() const noexcept { return w1.value.rows(); }
  std::size_t hidden_dim() const noexcept { return w1.value.cols(); }
  std::size_t output_dim() const noexcept { return w2.value.cols(); }
  const EmbedNetConfig& config() const noexcept { return cfg_; }

  std::array<ParamBlock*, 4> params() noexcept { return {&w1, &b1, &w2, &b2}; }
  std::array<const ParamBlock*, 4> params() const noexcept { return {&w1, &b1, &w2, &b2}; }
  void zero_grad();

  /// Adam update of every block; invalidates outstanding forward caches.
  void step(const AdamConfig& adam, std::uint64_t t);
  /// Call after editing parameter values directly.
  void mark_modified() noexcept { ++generation_; }

  std::uint64_t id() const noexcept { return id_; }
  std::uint64_t generation() const noexcept { return generation_; }

  ParamBlock w1;  // Q×H
  ParamBlock b1;  // 1×H
  ParamBlock w2;  // H×P
  ParamBlock b2;  // 1×P

 private:
  EmbedNetConfig cfg_;
  std::uint64_t id_;
  std::uint64_t generation_ = 0;
};

/// Intermediates of one forward pass, consumed by backward_layers.
struct ForwardCache {
  std::uint64_t net_id = 0;
  std::uint64_t net_generation = 0;
  bool train_mode = false;
  Matrix input;   // C×Q
  Matrix pre1;    // C×H, before the activation
  Matrix mask;    // C×H inverted-dropout mask, empty in eval mode
  Matrix hidden;  // C×H, after activation and dropout
  Matrix output;  // C×P, tanh output
};

/// Dropout (with the net's rate) is applied only when train_mode is set; `rng` is used only then.
ForwardCache forward_layers(const EmbedNet& net, const Matrix& v, bool train_mode, Rng& rng);
/// Eval-mode forward; pure.
ForwardCache forward_layers(const EmbedNet& net, const Matrix& v);

/// Accumulates ∂(upstream scalar)/∂θ into every block's grad buffer given dZ.
/// Throws ValidationError if the cache came from a different net or an older parameter state.
void backward_layers(EmbedNet& net, const ForwardCache& cache, const Matrix& dz);

/// Row c of the result is ψ(v_c).
Matrix embed_prototypes(const EmbedNet& net, const Matrix& v, bool train_mode, Rng& rng);
Matrix embed_prototypes(const EmbedNet& net, const Matrix& v);

}  // namespace pvzsl
