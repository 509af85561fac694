// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

void LossConfig::validate() const {
  const double weights[] = {lambda0, lambda1, lambda2, lambda3, gamma1, gamma2};
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("loss weights must be >= 0");
  }
  const double margins[] = {margin1, margin2, margin3, margin4};
  for (double m : margins) {
    if (!(m >= 0.0)) throw ValidationError("loss margins must be >= 0");
  }
  if (!(prob_floor > 0.0 && prob_floor <= 1e-6)) {
    throw ValidationError("prob_floor must be in (0, 1e-6]");
  }
}

// ---- entropy primitives -------------------------------------------------------------------

namespace {

double log2_capacity(std::size_t k) {
  if (k < 2) {
    throw ValidationError("regularized entropy needs at least 2 classes, got " +
                          std::to_string(k));
  }
  return std::log2(static_cast<double>(k));
}

double clamped_log(double p, double floor) { return std::log(std::max(p, floor)); }

}  // namespace

double reg_entropy(std::span<const double> p, double prob_floor) {
  const double cap = log2_capacity(p.size());
  double h = 0.0;
  for (double pk : p) h -= pk * clamped_log(pk, prob_floor);
  return h / cap;
}

double reg_entropy(const ProbVector& p, double prob_floor) { return reg_entropy(p.probs, prob_floor); }

void reg_entropy_backward(std::span<const double> p, double prob_floor, double upstream,
                          std::span<double> dp) {
  const double scale = upstream / log2_capacity(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    // d/dp [-p ln max(p, f)] is -(ln p + 1) above the floor and -ln f below it.
    const double d = p[k] > prob_floor ? -(std::log(p[k]) + 1.0) : -std::log(prob_floor);
    dp[k] += scale * d;
  }
}

// ---- shared machinery ---------------------------------------------------------------------

namespace {

/// Pushes dL/dP (rows = points, cols = classes) through the softmax and the score into dZ.
void backprop_pv(const Matrix& x, const Matrix& z, const ClassSet& classes,
                 const LossContext& ctx, const Matrix& probs, const Matrix& d_probs,
                 GradSink sink, Matrix* dx = nullptr) {
  Matrix d_scores = softmax_backward(probs, d_probs);
  for (double& g : d_scores.values()) g *= sink.weight;
  score_matrix_backward(x, z, classes, ctx.spec, d_scores, *sink.dz, dx);
}

double cross_entropy_over(const LabeledPoints& points, const Matrix& z, const ClassSet& classes,
                          const LossContext& ctx, GradSink sink) {
  if (points.x.rows() != points.y.size()) {
    throw DimensionError("cross entropy: " + std::to_string(points.x.rows()) + " rows but " +
                         std::to_string(points.y.size()) + " labels");
  }
  const std::size_t n = points.size();
  if (n == 0) return 0.0;
  const Matrix probs = pv_matrix(points.x, z, classes, ctx.spec);
  Matrix d_scores(n, classes.size());
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = classes.index_of(points.y[i]);
    const double p_true = probs(i, k);
    total -= clamped_log(p_true, ctx.prob_floor);
    if (sink.active() && p_true > ctx.prob_floor) {
      for (std::size_t c = 0; c < classes.size(); ++c) d_scores(i, c) = probs(i, c) * inv_n;
      d_scores(i, k) -= inv_n;
    }
  }
  if (sink.active()) {
    for (double& g : d_scores.values()) g *= sink.weight;
    score_matrix_backward(points.x, z, classes, ctx.spec, d_scores, *sink.dz);
  }
  return total * inv_n;
}

/// -[with_marginal]·R(P̄) + λ0·mean[R(p) - margin]+ over `classes`.
double mi_over(const Matrix& x, const Matrix& z, const ClassSet& classes, const LossContext& ctx,
               double lambda0, double margin1, bool with_marginal, GradSink sink) {
  const std::size_t n = x.rows();
  if (n < 2) throw ValidationError("MI loss needs a batch of at least 2 points");
  const std::size_t k = classes.size();
  const Matrix probs = pv_matrix(x, z, classes, ctx.spec);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> marginal(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) marginal[c] += probs(i, c) * inv_n;
  }
  Matrix d_probs(n, k);
  double value = 0.0;
  if (with_marginal) {
    value -= reg_entropy(marginal, ctx.prob_floor);
    if (sink.active()) {
      std::vector<double> d_marginal(k, 0.0);
      reg_entropy_backward(marginal, ctx.prob_floor, -1.0, d_marginal);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) d_probs(i, c) += d_marginal[c] * inv_n;
      }
    }
  }
  double conditional = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double excess = reg_entropy(probs.row(i), ctx.prob_floor) - margin1;
    if (excess > 0.0) {
      conditional += excess;
      if (sink.active()) {
        reg_entropy_backward(probs.row(i), ctx.prob_floor, lambda0 * inv_n, d_probs.row(i));
      }
    }
  }
  value += lambda0 * conditional * inv_n;
  if (sink.active()) backprop_pv(x, z, classes, ctx, probs, d_probs, sink);
  return value;
}

}  // namespace

// ---- seen-data terms ----------------------------------------------------------------------

double l_ce(const LabeledPoints& batch, const Matrix& z, const LossContext& ctx, GradSink sink) {
  const ClassSet sources = ClassSet::source(ctx.layout);
  for (ClassId id : batch.y) {
    if (!ctx.layout.is_source(id)) {
      throw ValidationError("l_ce: label " + std::to_string(id) + " is not a source class");
    }
  }
  return cross_entropy_over(batch, z, sources, ctx, sink);
}

double l_ent(const Matrix& x, const Matrix& z, const LossContext& ctx, double margin1,
             GradSink sink) {
  const std::size_t n = x.rows();
  if (n == 0) return 0.0;
  const ClassSet targets = ClassSet::target(ctx.layout);
  const Matrix probs = pv_matrix(x, z, targets, ctx.spec);
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix d_probs(n, targets.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double excess = reg_entropy(probs.row(i), ctx.prob_floor) - margin1;
    if (excess > 0.0) {
      total += excess;
      if (sink.active()) reg_entropy_backward(probs.row(i), ctx.prob_floor, inv_n, d_probs.row(i));
    }
  }
  if (sink.active()) backprop_pv(x, z, targets, ctx, probs, d_probs, sink);
  return total * inv_n;
}

double l_mi(const Matrix& x, const Matrix& z, const LossContext& ctx, double lambda0,
            double margin1, bool with_marginal, GradSink sink) {
  return mi_over(x, z, ClassSet::target(ctx.layout), ctx, lambda0, margin1, with_marginal, sink);
}

double l_ec(const Matrix& x, const Matrix& z, const LossContext& ctx, double margin2,
            GradSink sink) {
  const std::size_t n = x.rows();
  if (n == 0) return 0.0;
  const ClassSet sources = ClassSet::source(ctx.layout);
  const ClassSet targets = ClassSet::target(ctx.layout);
  const Matrix p_src = pv_matrix(x, z, sources, ctx.spec);
  const Matrix p_tgt = pv_matrix(x, z, targets, ctx.spec);
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix d_src(n, sources.size());
  Matrix d_tgt(n, targets.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r_s = reg_entropy(p_src.row(i), ctx.prob_floor);
    const double r_u = reg_entropy(p_tgt.row(i), ctx.prob_floor);
    const double violation = r_s + margin2 - r_u;
    if (violation > 0.0) {
      total += violation;
      if (sink.active()) {
        reg_entropy_backward(p_src.row(i), ctx.prob_floor, inv_n, d_src.row(i));
        reg_entropy_backward(p_tgt.row(i), ctx.prob_floor, -inv_n, d_tgt.row(i));
      }
    }
  }
  if (sink.active()) {
    backprop_pv(x, z, sources, ctx, p_src, d_src, sink);
    backprop_pv(x, z, targets, ctx, p_tgt, d_tgt, sink);
  }
  return total * inv_n;
}

namespace {

struct SpceTerms {
  Matrix mapped_targets;  // T×P rows of Z for the target classes
  Matrix p_orig;          // T×S, constant
  Matrix p_mapped;        // T×S
  std::vector<double> reg_ce;
};

SpceTerms spce_terms(const Matrix& v, const Matrix& z, const LossContext& ctx) {
  const ClassLayout& layout = ctx.layout;
  if (layout.num_source < 2) throw ValidationError("l_spce needs at least 2 source classes");
  if (layout.num_target == 0) throw ValidationError("l_spce needs at least 1 target class");
  if (v.rows() != layout.num_classes() || z.rows() != layout.num_classes()) {
    throw DimensionError("l_spce: attribute table " + v.shape_string() + " / prototypes " +
                         z.shape_string() + " do not cover " +
                         std::to_string(layout.num_classes()) + " classes");
  }
  const ClassSet sources = ClassSet::source(layout);
  std::vector<std::size_t> target_rows(layout.num_target);
  for (std::size_t i = 0; i < layout.num_target; ++i) target_rows[i] = layout.num_source + i;

  SpceTerms t;
  t.mapped_targets = gather_rows(z, target_rows);
  t.p_orig = pv_matrix(gather_rows(v, target_rows), v, sources, ctx.spec);
  t.p_mapped = pv_matrix(t.mapped_targets, z, sources, ctx.spec);
  const double cap = std::log2(static_cast<double>(layout.num_source));
  t.reg_ce.resize(layout.num_target);
  for (std::size_t i = 0; i < layout.num_target; ++i) {
    double ce = 0.0;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const double p = t.p_orig(i, j);
      if (p == 0.0) continue;
      ce -= p * clamped_log(t.p_mapped(i, j), ctx.prob_floor);
    }
    t.reg_ce[i] = ce / cap;
  }
  return t;
}

}  // namespace

std::vector<double> spce_per_class(const Matrix& v, const Matrix& z, const LossContext& ctx) {
  return spce_terms(v, z, ctx).reg_ce;
}

double l_spce(const Matrix& v, const Matrix& z, const LossContext& ctx, double margin3,
              GradSink sink) {
  const SpceTerms t = spce_terms(v, z, ctx);
  const std::size_t num_t = ctx.layout.num_target;
  const std::size_t num_s = ctx.layout.num_source;
  const double inv_t = 1.0 / static_cast<double>(num_t);
  const double cap = std::log2(static_cast<double>(num_s));
  Matrix d_mapped(num_t, num_s);
  double total = 0.0;
  for (std::size_t i = 0; i < num_t; ++i) {
    const double excess = t.reg_ce[i] - margin3;
    if (excess <= 0.0) continue;
    total += excess;
    if (!sink.active()) continue;
    for (std::size_t j = 0; j < num_s; ++j) {
      const double q = t.p_mapped(i, j);
      if (q > ctx.prob_floor) d_mapped(i, j) = -inv_t * t.p_orig(i, j) / (q * cap);
    }
  }
  if (sink.active()) {
    const ClassSet sources = ClassSet::source(ctx.layout);
    Matrix d_targets(num_t, z.cols());
    backprop_pv(t.mapped_targets, z, sources, ctx, t.p_mapped, d_mapped, sink, &d_targets);
    // The query side of each score is ψ(v_t) itself, i.e. a target row of Z.
    for (std::size_t i = 0; i < num_t; ++i) {
      auto dst = sink.dz->row(num_s + i);
      auto src = d_targets.row(i);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  return total * inv_t;
}

// ---- generated-data terms -----------------------------------------------------------------

std::vector<std::size_t> selected_rows(const Matrix& x, const Matrix& z, const LossContext& ctx,
                                       double margin4) {
  std::vector<std::size_t> rows;
  if (x.rows() == 0) return rows;
  const Matrix probs = pv_matrix(x, z, ClassSet::target(ctx.layout), ctx.spec);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (reg_entropy(probs.row(i), ctx.prob_floor) < margin4) rows.push_back(i);
  }
  return rows;
}

GeneratedSet select_generated(const GeneratedSet& gen, const Matrix& z, const LossContext& ctx,
                              double margin4) {
  const auto rows = selected_rows(gen.x, z, ctx, margin4);
  GeneratedSet kept;
  kept.x = gather_rows(gen.x, rows);
  for (std::size_t r : rows) kept.y.push_back(gen.y[r]);
  return kept;
}

GeneratedCe l_ce_gen(const GeneratedSet& selected, const Matrix& z, const LossContext& ctx,
                     GradSink sink) {
  if (selected.empty()) return {0.0, true};
  for (ClassId id : selected.y) {
    if (!ctx.layout.is_target(id)) {
      throw ValidationError("l_ce_gen: label " + std::to_string(id) + " is not a target class");
    }
  }
  return {cross_entropy_over(selected, z, ClassSet::target(ctx.layout), ctx, sink), false};
}

double l_mi_gen(const Matrix& x, const Matrix& z, const LossContext& ctx, double lambda0,
                double margin1, GradSink sink) {
  return mi_over(x, z, ClassSet::source(ctx.layout), ctx, lambda0, margin1, true, sink);
}

// ---- composition --------------------------------------------------------------------------

double LossReport::weighted_sum() const {
  double s = 0.0;
  for (const auto& [name, value] : per_term) s += weights.at(name) * value;
  return s;
}

namespace {

void add_term(LossReport& r, const std::string& name, double weight, double value) {
  r.per_term[name] = value;
  r.weights[name] = weight;
  r.total += weight * value;
}

}  // namespace

LossReport deterministic_loss(const LabeledPoints& batch, const Matrix& v, const Matrix& z,
                              const LossContext& ctx, const LossConfig& cfg, Matrix* dz) {
  LossReport r;
  r.batch_size = batch.size();
  add_term(r, "ce", 1.0, l_ce(batch, z, ctx, {dz, 1.0}));
  if (batch.size() >= 2) {
    add_term(r, "mi", cfg.lambda1,
             l_mi(batch.x, z, ctx, cfg.lambda0, cfg.margin1, cfg.mi_marginal, {dz, cfg.lambda1}));
  } else if (cfg.lambda1 != 0.0) {
    throw ValidationError("MI term needs a batch of at least 2 points");
  }
  add_term(r, "ec", cfg.lambda2, l_ec(batch.x, z, ctx, cfg.margin2, {dz, cfg.lambda2}));
  if (ctx.layout.num_source >= 2) {
    add_term(r, "spce", cfg.lambda3, l_spce(v, z, ctx, cfg.margin3, {dz, cfg.lambda3}));
  } else if (cfg.lambda3 != 0.0) {
    throw ValidationError("SPCE term needs at least 2 source classes");
  }
  return r;
}

LossReport generated_loss(const LabeledPoints& batch, const GeneratedSet& selected,
                          const Matrix& generated, const Matrix& v, const Matrix& z,
                          const LossContext& ctx, const LossConfig& cfg, Matrix* dz) {
  LossReport r = deterministic_loss(batch, v, z, ctx, cfg, dz);
  const GeneratedCe ce = l_ce_gen(selected, z, ctx, {dz, cfg.gamma1});
  if (ce.empty_selection) r.warnings.emplace_back("generated selection is empty");
  add_term(r, "ce_gen", cfg.gamma1, ce.value);
  double mi = 0.0;
  if (generated.rows() >= 2) {
    mi = l_mi_gen(generated, z, ctx, cfg.lambda0, cfg.margin1, {dz, cfg.gamma2});
  } else if (generated.rows() == 1) {
    r.warnings.emplace_back("generated MI skipped: fewer than 2 generated points");
  }
  add_term(r, "mi_gen", cfg.gamma2, mi);
  return r;
}

LossReport l_total_det(const LabeledPoints& batch, const Matrix& v, EmbedNet& net,
                       const LossContext& ctx, const LossConfig& cfg, bool accumulate_grads) {
  const ForwardCache cache = forward_layers(net, v);
  if (!accumulate_grads) return deterministic_loss(batch, v, cache.output, ctx, cfg);
  Matrix dz = Matrix::zeros_like(cache.output);
  LossReport r = deterministic_loss(batch, v, cache.output, ctx, cfg, &dz);
  backward_layers(net, cache, dz);
  return r;
}

LossReport l_total_gen(const LabeledPoints& batch, const GeneratedSet& gen, const Matrix& v,
                       EmbedNet& net, const LossContext& ctx, const LossConfig& cfg,
                       bool accumulate_grads) {
  const ForwardCache cache = forward_layers(net, v);
  const GeneratedSet selected = select_generated(gen, cache.output, ctx, cfg.margin4);
  if (!accumulate_grads) {
    return generated_loss(batch, selected, gen.x, v, cache.output, ctx, cfg);
  }
  Matrix dz = Matrix::zeros_like(cache.output);
  LossReport r = generated_loss(batch, selected, gen.x, v, cache.output, ctx, cfg, &dz);
  backward_layers(net, cache, dz);
  return r;
}

// ---- diagnostics --------------------------------------------------------------------------

MiEstimate mi_estimate(const Matrix& x, const Matrix& z, const ClassSet& classes,
                       const LossContext& ctx) {
  const std::size_t n = x.rows();
  if (n == 0) throw ValidationError("mi_estimate: no points");
  const Matrix probs = pv_matrix(x, z, classes, ctx.spec);
  const double cap = log2_capacity(classes.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> marginal(classes.size(), 0.0);
  double conditional = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = probs.row(i);
    for (std::size_t c = 0; c < p.size(); ++c) marginal[c] += p[c] * inv_n;
    conditional += reg_entropy(p, ctx.prob_floor) * inv_n;
  }
  MiEstimate out;
  out.regularized = reg_entropy(marginal, ctx.prob_floor) - conditional;
  out.nats = out.regularized * cap;
  return out;
}

std::vector<double> entropy_gaps(const Matrix& x, const Matrix& z, const LossContext& ctx) {
  const Matrix p_src = pv_matrix(x, z, ClassSet::source(ctx.layout), ctx.spec);
  const Matrix p_tgt = pv_matrix(x, z, ClassSet::target(ctx.layout), ctx.spec);
  std::vector<double> gaps(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    gaps[i] = reg_entropy(p_tgt.row(i), ctx.prob_floor) - reg_entropy(p_src.row(i), ctx.prob_floor);
  }
  return gaps;
}

}  // namespace pvzsl
