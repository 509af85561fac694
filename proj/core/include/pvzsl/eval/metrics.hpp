// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvzsl/data/bundle.hpp"
#include "pvzsl/losses/losses.hpp"
#include "pvzsl/proto/distance.hpp"
#include "pvzsl/proto/embed_net.hpp"

namespace pvzsl {

struct ClassAccuracy {
  std::map<ClassId, double> per_class;  // percent, only classes with test points
  double mean = 0.0;                    // unweighted mean of per_class, percent
  double micro = 0.0;                   // fraction of all points correct, percent
};

/// Accuracy per class over `class_ids`, then the unweighted mean. Classes without test points
/// are left out of the mean; truths outside `class_ids` are ignored. Throws ValidationError for
/// empty inputs or when no listed class has a test point, DimensionError when preds and truths
/// differ in length.
ClassAccuracy per_class_accuracy(std::span<const ClassId> preds, std::span<const ClassId> truths,
                                 std::span<const ClassId> class_ids);

/// 2·ts·tr/(ts+tr), 0 when both are 0.
double harmonic_mean(double ts, double tr);

/// Test-split metrics in percent. ts and tr search over all classes; zsl searches targets only.
struct EvalReport {
  double ts = 0.0;
  double tr = 0.0;
  double h = 0.0;
  std::optional<double> zsl;
  double ts_micro = 0.0;
  double tr_micro = 0.0;
  std::map<ClassId, double> per_class;
  std::size_t num_seen = 0;
  std::size_t num_unseen = 0;
};

/// Scores `seen_idx` and `unseen_idx` of the bundle against prototypes Z (row = id - 1).
/// Both splits must be non-empty.
EvalReport evaluate_prototypes(const Matrix& z, const DatasetBundle& b, const DistanceSpec& spec,
                               std::span<const Index> seen_idx, std::span<const Index> unseen_idx);

/// evaluate_prototypes on test_seen / test_unseen with eval-mode prototypes of `net`.
EvalReport gzsl_report(const EmbedNet& net, const DatasetBundle& b, const DistanceSpec& spec);

/// Validation metrics; any of them may be absent when the split it needs is empty.
struct ValidationMetrics {
  std::optional<double> ts;   // val_unseen over all classes
  std::optional<double> tr;   // val over all classes
  std::optional<double> h;    // needs both of the above
  std::optional<double> zsl;  // val_unseen over targets
};

ValidationMetrics validation_metrics(const Matrix& z, const DatasetBundle& b,
                                     const DistanceSpec& spec);

// ---- diagnostics --------------------------------------------------------------------------

/// Plug-in MI between `x` and the target classes, regularized (÷log2 T) and in nats.
MiEstimate mi_estimate(const EmbedNet& net, const Matrix& x, const DatasetBundle& b,
                       const DistanceSpec& spec);

/// R_u - R_s per row of `x`.
std::vector<double> entropy_gap_samples(const EmbedNet& net, const Matrix& x,
                                        const DatasetBundle& b, const DistanceSpec& spec);

/// Per-target-class regularized cross entropy between attribute-space and mapped PVs over
/// the sources, without the hinge.
std::vector<double> spce_values(const EmbedNet& net, const DatasetBundle& b,
                                const DistanceSpec& spec);

struct Diagnostics {
  MiEstimate mi_target;                // over the train split
  std::vector<double> entropy_gaps;    // over the train split
  double negative_gap_fraction = 0.0;  // share of entropy_gaps < 0
  std::vector<double> spce;            // one per target class
  double spce_mean = 0.0;
};

Diagnostics compute_diagnostics(const EmbedNet& net, const DatasetBundle& b,
                                const DistanceSpec& spec);

// ---- serialization ------------------------------------------------------------------------

/// Report JSON (see docs/report.md). `diagnostics` is optional.
std::string report_to_json(const EvalReport& r, const Diagnostics* diagnostics = nullptr);

/// "lo,hi,count" rows over `bins` equal-width bins spanning [lo, hi]; values outside are
/// clamped into the edge bins.
std::string histogram_csv(std::span<const double> values, std::size_t bins, double lo, double hi);

}  // namespace pvzsl
