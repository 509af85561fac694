// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pvzsl/ndcore/errors.hpp"
#include "pvzsl/proto/prob_vector.hpp"

namespace pvzsl {

ClassAccuracy per_class_accuracy(std::span<const ClassId> preds, std::span<const ClassId> truths,
                                 std::span<const ClassId> class_ids) {
  if (truths.empty()) throw ValidationError("per_class_accuracy: no test points");
  if (preds.size() != truths.size()) {
    throw DimensionError("per_class_accuracy: " + std::to_string(preds.size()) +
                         " predictions for " + std::to_string(truths.size()) + " truths");
  }
  std::map<ClassId, std::pair<std::size_t, std::size_t>> counts;  // id -> (correct, total)
  for (ClassId id : class_ids) counts[id] = {0, 0};
  std::size_t correct = 0, counted = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto it = counts.find(truths[i]);
    if (it == counts.end()) continue;
    ++it->second.second;
    ++counted;
    if (preds[i] == truths[i]) {
      ++it->second.first;
      ++correct;
    }
  }
  ClassAccuracy out;
  for (const auto& [id, c] : counts) {
    if (c.second == 0) continue;
    out.per_class[id] = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  if (out.per_class.empty()) throw ValidationError("per_class_accuracy: no listed class has points");
  for (const auto& [id, acc] : out.per_class) out.mean += acc;
  out.mean /= static_cast<double>(out.per_class.size());
  out.micro = 100.0 * static_cast<double>(correct) / static_cast<double>(counted);
  return out;
}

double harmonic_mean(double ts, double tr) {
  if (ts + tr == 0.0) return 0.0;
  return 2.0 * ts * tr / (ts + tr);
}

namespace {

ClassAccuracy split_accuracy(const Matrix& z, const DatasetBundle& b, const DistanceSpec& spec,
                             std::span<const Index> idx, const ClassSet& search,
                             const std::vector<ClassId>& scored) {
  const LabeledPoints pts = b.points(idx);
  const auto preds = predict_batch(pts.x, z, search, spec);
  return per_class_accuracy(preds, pts.y, scored);
}

}  // namespace

EvalReport evaluate_prototypes(const Matrix& z, const DatasetBundle& b, const DistanceSpec& spec,
                               std::span<const Index> seen_idx, std::span<const Index> unseen_idx) {
  if (seen_idx.empty() || unseen_idx.empty()) {
    throw ValidationError("GZSL evaluation needs non-empty seen and unseen test splits");
  }
  const ClassSet all = ClassSet::all(b.layout);
  const ClassAccuracy seen = split_accuracy(z, b, spec, seen_idx, all, b.source_ids());
  const ClassAccuracy unseen = split_accuracy(z, b, spec, unseen_idx, all, b.target_ids());
  const ClassAccuracy zsl =
      split_accuracy(z, b, spec, unseen_idx, ClassSet::target(b.layout), b.target_ids());
  EvalReport r;
  r.ts = unseen.mean;
  r.tr = seen.mean;
  r.h = harmonic_mean(r.ts, r.tr);
  r.zsl = zsl.mean;
  r.ts_micro = unseen.micro;
  r.tr_micro = seen.micro;
  r.per_class = seen.per_class;
  r.per_class.insert(unseen.per_class.begin(), unseen.per_class.end());
  r.num_seen = seen_idx.size();
  r.num_unseen = unseen_idx.size();
  return r;
}

EvalReport gzsl_report(const EmbedNet& net, const DatasetBundle& b, const DistanceSpec& spec) {
  return evaluate_prototypes(embed_prototypes(net, b.v), b, spec, b.test_seen_idx,
                             b.test_unseen_idx);
}

ValidationMetrics validation_metrics(const Matrix& z, const DatasetBundle& b,
                                     const DistanceSpec& spec) {
  ValidationMetrics m;
  const ClassSet all = ClassSet::all(b.layout);
  if (!b.val_idx.empty()) m.tr = split_accuracy(z, b, spec, b.val_idx, all, b.source_ids()).mean;
  if (!b.val_unseen_idx.empty()) {
    m.ts = split_accuracy(z, b, spec, b.val_unseen_idx, all, b.target_ids()).mean;
    m.zsl = split_accuracy(z, b, spec, b.val_unseen_idx, ClassSet::target(b.layout),
                           b.target_ids())
                .mean;
  }
  if (m.ts && m.tr) m.h = harmonic_mean(*m.ts, *m.tr);
  return m;
}

// ---- diagnostics --------------------------------------------------------------------------

namespace {

LossContext context_for(const DatasetBundle& b, const DistanceSpec& spec) {
  return LossContext{b.layout, spec, 1e-12};
}

}  // namespace

MiEstimate mi_estimate(const EmbedNet& net, const Matrix& x, const DatasetBundle& b,
                       const DistanceSpec& spec) {
  const LossContext ctx = context_for(b, spec);
  return mi_estimate(x, embed_prototypes(net, b.v), ClassSet::target(b.layout), ctx);
}

std::vector<double> entropy_gap_samples(const EmbedNet& net, const Matrix& x,
                                        const DatasetBundle& b, const DistanceSpec& spec) {
  return entropy_gaps(x, embed_prototypes(net, b.v), context_for(b, spec));
}

std::vector<double> spce_values(const EmbedNet& net, const DatasetBundle& b,
                                const DistanceSpec& spec) {
  return spce_per_class(b.v, embed_prototypes(net, b.v), context_for(b, spec));
}

Diagnostics compute_diagnostics(const EmbedNet& net, const DatasetBundle& b,
                                const DistanceSpec& spec) {
  const LossContext ctx = context_for(b, spec);
  const Matrix z = embed_prototypes(net, b.v);
  const LabeledPoints train = b.points(b.train_idx);
  Diagnostics d;
  d.mi_target = mi_estimate(train.x, z, ClassSet::target(b.layout), ctx);
  d.entropy_gaps = entropy_gaps(train.x, z, ctx);
  const auto negative = std::count_if(d.entropy_gaps.begin(), d.entropy_gaps.end(),
                                      [](double g) { return g < 0.0; });
  d.negative_gap_fraction =
      static_cast<double>(negative) / static_cast<double>(std::max<std::size_t>(1, d.entropy_gaps.size()));
  if (b.layout.num_source >= 2) {
    d.spce = spce_per_class(b.v, z, ctx);
    for (double v : d.spce) d.spce_mean += v;
    d.spce_mean /= static_cast<double>(d.spce.size());
  }
  return d;
}

// ---- serialization ------------------------------------------------------------------------

std::string report_to_json(const EvalReport& r, const Diagnostics* diagnostics) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [id, acc] : r.per_class) per_class[std::to_string(id)] = acc;
  nlohmann::json j = {{"ts", r.ts},
                      {"tr", r.tr},
                      {"H", r.h},
                      {"zsl", r.zsl ? nlohmann::json(*r.zsl) : nlohmann::json(nullptr)},
                      {"ts_micro", r.ts_micro},
                      {"tr_micro", r.tr_micro},
                      {"num_test_seen", r.num_seen},
                      {"num_test_unseen", r.num_unseen},
                      {"per_class", per_class}};
  if (diagnostics != nullptr) {
    j["diagnostics"] = {
        {"mi_target", {{"regularized", diagnostics->mi_target.regularized},
                       {"nats", diagnostics->mi_target.nats}}},
        {"negative_gap_fraction", diagnostics->negative_gap_fraction},
        {"spce", diagnostics->spce},
        {"spce_mean", diagnostics->spce_mean}};
  }
  return j.dump(2) + "\n";
}

std::string histogram_csv(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw ValidationError("histogram needs bins > 0 and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    auto k = static_cast<long long>(std::floor((v - lo) / width));
    k = std::clamp<long long>(k, 0, static_cast<long long>(bins) - 1);
    ++counts[static_cast<std::size_t>(k)];
  }
  std::ostringstream out;
  out.precision(17);
  out << "lo,hi,count\n";
  for (std::size_t k = 0; k < bins; ++k) {
    out << lo + width * static_cast<double>(k) << ',' << lo + width * static_cast<double>(k + 1)
        << ',' << counts[k] << '\n';
  }
  return out.str();
}

}  // namespace pvzsl
