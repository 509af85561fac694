// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "pvzsl/data/bundle.hpp"

namespace pvzsl {

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t num_source = 12;
  std::size_t num_target = 4;
  std::size_t attribute_dim = 16;
  std::size_t feature_dim = 32;
  std::size_t n_per_class = 150;
  double noise_sigma = 0.15;
  /// Standard deviation of G entries, times sqrt(Q).
  double projection_scale = 1.5;
  /// Symmetric Dirichlet parameter of the target mixing weights.
  double mixing_concentration = 0.5;
  /// Fraction of each target class moved from test_unseen into val_unseen_idx.
  double val_unseen_frac = 0.0;

  void validate() const;
};

struct SynthResult {
  DatasetBundle bundle;  // raw features, preprocessing = none
  Matrix class_means;    // (S+T)×P noiseless class centres tanh(G·v_c)
  Matrix projection;     // Q×P map G
};

/// Seeded GZSL stand-in. Sources get U[0,1]^Q attributes; each target attribute is a
/// Dirichlet-weighted convex combination of 2 or 3 distinct sources. Class means are
/// tanh(v_c·G) for a fixed Gaussian G with variance 1/Q, and every point is its class mean
/// plus N(0, σ²) noise per dimension. Source points are split 70/10/20 into
/// train/val/test_seen per class; target points form test_unseen. All stored values are
/// binary32-representable.
SynthResult synth_benchmark(const SynthConfig& cfg);

enum class GeneratedKind { oracle, uniform_noise };

/// Generated target features in the raw feature space of `synth`:
///   oracle        - class mean plus N(0, σ²) noise with the benchmark's σ
///   uniform_noise - uniform inside the per-dimension [min, max] of the benchmark features
/// `per_class` points per target class, labels in target order.
GeneratedSet synth_generated(const SynthResult& synth, GeneratedKind kind,
                             std::size_t per_class, std::uint64_t seed);

GeneratedKind parse_generated_kind(const std::string& name);

}  // namespace pvzsl
