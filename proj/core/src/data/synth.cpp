// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pvzsl/ndcore/errors.hpp"
#include "pvzsl/ndcore/rng.hpp"

namespace pvzsl {

namespace {

// Independent streams so that changing one ingredient's size leaves the others intact.
enum Stream : std::uint64_t {
  kAttributes = 1,
  kMixing = 2,
  kProjection = 3,
  kNoise = 4,
  kSplit = 5,
};

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void SynthConfig::validate() const {
  if (num_source < 4) throw ValidationError("synth_benchmark needs S >= 4");
  if (num_target < 2) throw ValidationError("synth_benchmark needs T >= 2");
  if (attribute_dim == 0 || feature_dim == 0) throw ValidationError("dimensions must be positive");
  if (n_per_class < 10) throw ValidationError("synth_benchmark needs n_per_class >= 10");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("noise_sigma must be finite and >= 0");
  }
  if (!(projection_scale > 0.0) || !std::isfinite(projection_scale)) {
    throw ValidationError("projection_scale must be finite and > 0");
  }
  if (!(mixing_concentration > 0.0) || !std::isfinite(mixing_concentration)) {
    throw ValidationError("mixing_concentration must be finite and > 0");
  }
  if (!(val_unseen_frac >= 0.0 && val_unseen_frac < 1.0)) {
    throw ValidationError("val_unseen_frac must be in [0, 1)");
  }
}

SynthResult synth_benchmark(const SynthConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  const std::size_t s = cfg.num_source;
  const std::size_t t = cfg.num_target;
  const std::size_t c = s + t;
  const std::size_t q = cfg.attribute_dim;
  const std::size_t p = cfg.feature_dim;

  SynthResult out;
  DatasetBundle& b = out.bundle;
  b.layout = {s, t};
  b.v = Matrix(c, q);

  Rng attr_rng = root.derive(kAttributes);
  for (std::size_t k = 0; k < s; ++k) {
    for (std::size_t j = 0; j < q; ++j) b.v(k, j) = f32(attr_rng.uniform());
  }

  Rng mix_rng = root.derive(kMixing);
  std::vector<std::size_t> pool(s);
  for (std::size_t k = s; k < c; ++k) {
    const std::size_t parts = 2 + static_cast<std::size_t>(mix_rng.below(2));
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `parts` entries become a uniform draw without replacement.
    for (std::size_t i = 0; i < parts; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(mix_rng.below(s - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<double> w(parts);
    double total = 0.0;
    for (double& wi : w) total += (wi = mix_rng.gamma(cfg.mixing_concentration));
    for (std::size_t j = 0; j < q; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < parts; ++i) acc += (w[i] / total) * b.v(pool[i], j);
      b.v(k, j) = f32(acc);
    }
  }

  Rng proj_rng = root.derive(kProjection);
  out.projection = Matrix(q, p);
  const double g_sigma = cfg.projection_scale / std::sqrt(static_cast<double>(q));
  for (double& g : out.projection.values()) g = proj_rng.normal(0.0, g_sigma);

  // Zero column sums.
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < q; ++i) mean += out.projection(i, j);
    mean /= static_cast<double>(q);
    for (std::size_t i = 0; i < q; ++i) out.projection(i, j) -= mean;
  }
  out.class_means = matmul(b.v, out.projection);
  for (double& m : out.class_means.values()) m = f32(std::tanh(m));

  const std::size_t n = c * cfg.n_per_class;
  b.x = Matrix(n, p);
  b.y.resize(n);
  Rng noise_rng = root.derive(kNoise);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
      const std::size_t row = k * cfg.n_per_class + i;
      b.y[row] = static_cast<ClassId>(k + 1);
      for (std::size_t j = 0; j < p; ++j) {
        b.x(row, j) = f32(out.class_means(k, j) + noise_rng.normal(0.0, cfg.noise_sigma));
      }
    }
  }

  // Stratified splits: each source class contributes 70/10/20 of its points.
  Rng split_rng = root.derive(kSplit);
  const std::size_t per = cfg.n_per_class;
  const auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(per)));
  const auto n_val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(per)));
  const auto n_val_unseen =
      static_cast<std::size_t>(std::llround(cfg.val_unseen_frac * static_cast<double>(per)));
  std::vector<Index> rows(per);
  for (std::size_t k = 0; k < c; ++k) {
    std::iota(rows.begin(), rows.end(), static_cast<Index>(k * per));
    split_rng.shuffle(std::span<Index>(rows));
    if (k < s) {
      b.train_idx.insert(b.train_idx.end(), rows.begin(), rows.begin() + n_train);
      b.val_idx.insert(b.val_idx.end(), rows.begin() + n_train, rows.begin() + n_train + n_val);
      b.test_seen_idx.insert(b.test_seen_idx.end(), rows.begin() + n_train + n_val, rows.end());
    } else {
      b.val_unseen_idx.insert(b.val_unseen_idx.end(), rows.begin(), rows.begin() + n_val_unseen);
      b.test_unseen_idx.insert(b.test_unseen_idx.end(), rows.begin() + n_val_unseen, rows.end());
    }
  }
  for (auto* idx : {&b.train_idx, &b.val_idx, &b.test_seen_idx, &b.test_unseen_idx,
                    &b.val_unseen_idx}) {
    std::sort(idx->begin(), idx->end());
  }

  b.provenance.generator = "synth_benchmark";
  b.provenance.seed = cfg.seed;
  b.provenance.params = {{"S", static_cast<double>(s)},
                         {"T", static_cast<double>(t)},
                         {"Q", static_cast<double>(q)},
                         {"P", static_cast<double>(p)},
                         {"n_per_class", static_cast<double>(per)},
                         {"noise_sigma", cfg.noise_sigma},
                         {"projection_scale", cfg.projection_scale},
                         {"mixing_concentration", cfg.mixing_concentration},
                         {"val_unseen_frac", cfg.val_unseen_frac}};
  validate_bundle(b);
  return out;
}

GeneratedKind parse_generated_kind(const std::string& name) {
  if (name == "oracle") return GeneratedKind::oracle;
  if (name == "uniform_noise" || name == "noise") return GeneratedKind::uniform_noise;
  throw ValidationError("unknown generated kind '" + name + "' (oracle, uniform_noise)");
}

GeneratedSet synth_generated(const SynthResult& synth, GeneratedKind kind, std::size_t per_class,
                             std::uint64_t seed) {
  const DatasetBundle& b = synth.bundle;
  const std::size_t p = b.feature_dim();
  const std::size_t s = b.layout.num_source;
  const std::size_t t = b.layout.num_target;
  double sigma = 0.0;
  if (auto it = b.provenance.params.find("noise_sigma"); it != b.provenance.params.end()) {
    sigma = it->second;
  }
  std::vector<double> lo(p, 0.0), hi(p, 0.0);
  if (kind == GeneratedKind::uniform_noise) {
    if (b.num_points() == 0) throw ValidationError("uniform_noise needs a non-empty bundle");
    for (std::size_t j = 0; j < p; ++j) lo[j] = hi[j] = b.x(0, j);
    for (std::size_t i = 1; i < b.num_points(); ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        lo[j] = std::min(lo[j], b.x(i, j));
        hi[j] = std::max(hi[j], b.x(i, j));
      }
    }
  }

  Rng rng(seed);
  GeneratedSet gen;
  gen.x = Matrix(t * per_class, p);
  gen.y.resize(t * per_class);
  for (std::size_t k = 0; k < t; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t row = k * per_class + i;
      gen.y[row] = static_cast<ClassId>(s + k + 1);
      for (std::size_t j = 0; j < p; ++j) {
        const double v = kind == GeneratedKind::oracle
                             ? synth.class_means(s + k, j) + rng.normal(0.0, sigma)
                             : rng.uniform(lo[j], hi[j]);
        gen.x(row, j) = f32(v);
      }
    }
  }
  return gen;
}

}  // namespace pvzsl
