// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/proto/class_set.hpp"
#include "pvzsl/proto/distance.hpp"
#include "pvzsl/proto/embed_net.hpp"
#include "pvzsl/proto/points.hpp"
#include "pvzsl/proto/prob_vector.hpp"

namespace pvzsl {

/// Weights and margins of the information-theoretic objective. All entropies are positive
/// quantities (H = -Σ p ln p) divided by log2(K), so every "regularized" value lies in
/// [0, ln 2] whatever the number of classes K.
struct LossConfig {
  double lambda0 = 1.0;   // conditional-entropy weight inside the MI term
  double lambda1 = 0.05;  // MI
  double lambda2 = 0.5;   // entropy constraint
  double lambda3 = 0.05;  // semantic-preserving cross entropy
  double gamma1 = 1.0;    // generated-data cross entropy
  double gamma2 = 0.1;    // generated-data MI
  double margin1 = 0.15;
  double margin2 = 0.05;
  double margin3 = 0.3;
  double margin4 = 0.3;
  double prob_floor = 1e-12;
  /// When false the MI term keeps only its conditional-entropy part (the "+Ent" ablation).
  bool mi_marginal = true;

  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

/// Shared evaluation context for every loss: the class split, the score, the log clamp.
struct LossContext {
  ClassLayout layout;
  DistanceSpec spec;
  double prob_floor = 1e-12;
};

/// Accumulation target for analytic gradients: dz += weight · ∂L/∂Z when dz is non-null.
struct GradSink {
  Matrix* dz = nullptr;
  double weight = 1.0;

  bool active() const noexcept { return dz != nullptr && weight != 0.0; }
};

// ---- entropy primitives -------------------------------------------------------------------

/// H(p)/log2(K) with probabilities clamped at `prob_floor` inside the log. Throws
/// ValidationError for K < 2.
double reg_entropy(std::span<const double> p, double prob_floor = 1e-12);
double reg_entropy(const ProbVector& p, double prob_floor = 1e-12);
/// dp += upstream · ∂reg_entropy/∂p.
void reg_entropy_backward(std::span<const double> p, double prob_floor, double upstream,
                          std::span<double> dp);

// ---- seen-data terms ----------------------------------------------------------------------
// Each returns the loss value and, through `sink`, accumulates its gradient w.r.t. the
// prototype matrix Z (row = class id - 1).

/// Mean cross entropy of labelled seen points over source prototypes.
double l_ce(const LabeledPoints& batch, const Matrix& z, const LossContext& ctx,
            GradSink sink = {});

/// Hinged conditional entropy over target prototypes: mean of [R(p(x)) - margin1]+.
double l_ent(const Matrix& x, const Matrix& z, const LossContext& ctx, double margin1,
             GradSink sink = {});

/// -R(P̄) + λ0·l_ent over target prototypes, P̄ the batch-mean PV. Needs >= 2 points.
double l_mi(const Matrix& x, const Matrix& z, const LossContext& ctx, double lambda0,
            double margin1, bool with_marginal = true, GradSink sink = {});

/// Mean of [R_s(x) + margin2 - R_u(x)]+ with R_u over targets and R_s over sources.
double l_ec(const Matrix& x, const Matrix& z, const LossContext& ctx, double margin2,
            GradSink sink = {});

/// Mean over target classes of [CE(p_orig, p_mapped)/log2(S) - margin3]+, where p_orig is the
/// PV of v_t over source attributes in attribute space (constant) and p_mapped the PV of ψ(v_t)
/// over mapped source prototypes. `v` is the (S+T)×Q attribute table. Needs S >= 2.
double l_spce(const Matrix& v, const Matrix& z, const LossContext& ctx, double margin3,
              GradSink sink = {});

/// The un-hinged per-target-class regularized cross entropy used by l_spce.
std::vector<double> spce_per_class(const Matrix& v, const Matrix& z, const LossContext& ctx);

// ---- generated-data terms -----------------------------------------------------------------

/// Rows of `x` whose target-side PV has regularized entropy < margin4, ascending.
std::vector<std::size_t> selected_rows(const Matrix& x, const Matrix& z, const LossContext& ctx,
                                       double margin4);

/// Keeps exactly the points whose target-side PV has regularized entropy < margin4.
GeneratedSet select_generated(const GeneratedSet& gen, const Matrix& z, const LossContext& ctx,
                              double margin4);

struct GeneratedCe {
  double value = 0.0;
  bool empty_selection = false;
};

/// Mean cross entropy of selected generated points over target prototypes only.
/// An empty selection yields 0 with the flag set.
GeneratedCe l_ce_gen(const GeneratedSet& selected, const Matrix& z, const LossContext& ctx,
                     GradSink sink = {});

/// l_mi with source prototypes in place of target prototypes.
double l_mi_gen(const Matrix& x, const Matrix& z, const LossContext& ctx, double lambda0,
                double margin1, GradSink sink = {});

// ---- composition --------------------------------------------------------------------------

struct LossReport {
  double total = 0.0;
  std::map<std::string, double> per_term;
  std::map<std::string, double> weights;
  std::size_t batch_size = 0;
  std::vector<std::string> warnings;

  double weighted_sum() const;
};

/// L_D = L_CE + λ1·L_MI + λ2·L_EC + λ3·L_SPCE on one seen batch against prototypes Z.
LossReport deterministic_loss(const LabeledPoints& batch, const Matrix& v, const Matrix& z,
                              const LossContext& ctx, const LossConfig& cfg,
                              Matrix* dz = nullptr);

/// L_G = L_D + γ1·L̃_CE(selected) + γ2·L̃_MI(generated). `selected` is the output of
/// select_generated; `generated` is the full (or mini-batched) generated pool.
LossReport generated_loss(const LabeledPoints& batch, const GeneratedSet& selected,
                          const Matrix& generated, const Matrix& v, const Matrix& z,
                          const LossContext& ctx, const LossConfig& cfg, Matrix* dz = nullptr);

/// Net-level L_D: embeds `v` with dropout off, evaluates, and optionally backpropagates into
/// the net's grad buffers.
LossReport l_total_det(const LabeledPoints& batch, const Matrix& v, EmbedNet& net,
                       const LossContext& ctx, const LossConfig& cfg, bool accumulate_grads = false);

/// Net-level L_G: like l_total_det, selecting from `gen` with margin4 against the current
/// prototypes first.
LossReport l_total_gen(const LabeledPoints& batch, const GeneratedSet& gen, const Matrix& v,
                       EmbedNet& net, const LossContext& ctx, const LossConfig& cfg,
                       bool accumulate_grads = false);

// ---- diagnostics --------------------------------------------------------------------------

struct MiEstimate {
  double regularized = 0.0;  // R(P̄) - mean R(p(x)), in [0, ln 2]
  double nats = 0.0;         // H(P̄) - mean H(p(x))
};

/// Plug-in mutual information between points and the classes of `classes`.
MiEstimate mi_estimate(const Matrix& x, const Matrix& z, const ClassSet& classes,
                       const LossContext& ctx);

/// R_u(x) - R_s(x) per point.
std::vector<double> entropy_gaps(const Matrix& x, const Matrix& z, const LossContext& ctx);

}  // namespace pvzsl
