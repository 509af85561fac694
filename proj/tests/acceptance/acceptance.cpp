// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any required one fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pvzsl/data/bundle.hpp"
#include "pvzsl/data/synth.hpp"
#include "pvzsl/eval/metrics.hpp"
#include "pvzsl/losses/losses.hpp"
#include "pvzsl/proto/prob_vector.hpp"
#include "pvzsl/train/train.hpp"
#include "support.hpp"

namespace pvzsl {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> check;
  bool optional = false;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- gradient suite -------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto checks = testing::loss_gradient_suite(7);
  const double secs = seconds_since(t0);
  bool ok = checks.size() == 7 && secs < 30.0;
  double worst = 0.0;
  std::string failed;
  for (const auto& c : checks) {
    worst = std::max(worst, c.report.worst());
    if (!c.report.all_passed()) {
      ok = false;
      failed += " " + c.name;
    }
  }
  return {ok, fmt("%zu losses, worst rel err %.2e (tol 1e-4), %.2fs (limit 30s)%s", checks.size(),
                  worst, secs, failed.empty() ? "" : (" failing:" + failed).c_str())};
}

// ---- entropy invariants ---------------------------------------------------------------------

Outcome entropy_invariants() {
  Rng rng(2026);
  const double ln2 = std::log(2.0);
  double lo = 1e9, hi = -1e9, uniform_err = 0.0, one_hot_max = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 2 + rng.below(49);
    std::vector<double> p(k);
    const double temp = std::exp(rng.uniform(-3, 4));
    for (double& v : p) v = rng.normal() * temp;
    softmax_inplace(p);
    const double r = reg_entropy(p);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    const std::vector<double> uniform(k, 1.0 / static_cast<double>(k));
    uniform_err = std::max(uniform_err, std::abs(reg_entropy(uniform) - ln2));
    std::vector<double> one_hot(k, 0.0);
    one_hot[rng.below(k)] = 1.0;
    one_hot_max = std::max(one_hot_max, std::abs(reg_entropy(one_hot)));
  }
  const bool ok = lo >= 0.0 && hi <= ln2 + 1e-9 && uniform_err <= 1e-9 && one_hot_max == 0.0;
  return {ok, fmt("10000 PVs, K in 2..50: range [%.3g, %.9f], uniform err %.1e, one-hot max %.1e", lo,
                  hi, uniform_err, one_hot_max)};
}

// ---- closed forms ---------------------------------------------------------------------------

// Under the dot score with Z = I, row x of the input is exactly the logit vector.
LossContext dot_context(std::size_t s, std::size_t t) {
  return {{s, t}, DistanceSpec{DistanceKind::dot, 0.5, 1.0}, 1e-12};
}

Matrix identity(std::size_t n) {
  Matrix z(n, n);
  for (std::size_t i = 0; i < n; ++i) z(i, i) = 1.0;
  return z;
}

// Two-class logit whose softmax has binary entropy `target` (nats), by bisection.
double logit_with_entropy(double target) {
  double lo = 1e-12, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double p = 0.5 * (lo + hi);
    const double h = -p * std::log(p) - (1 - p) * std::log(1 - p);
    (h < target ? lo : hi) = p;
  }
  const double p = 0.5 * (lo + hi);
  return std::log((1 - p) / p);
}

Outcome closed_forms() {
  // Straight-line evaluations, independent of the library code paths.
  const double ln2 = std::log(2.0);
  const double mi_oracle = -ln2 + 1.0 * (ln2 - 0.15);
  const double ec_oracle = std::max(0.2 + 0.05 - 0.1, 0.0);
  const double spce_oracle = std::max(std::log(5.0) / std::log2(5.0) - 0.3, 0.0);

  const LossContext mi_ctx = dot_context(2, 3);
  const double mi = l_mi(Matrix(4, 5, 0.0), identity(5), mi_ctx, 1.0, 0.15);

  const LossContext ec_ctx = dot_context(2, 2);
  Matrix x(1, 4, 0.0);
  x(0, 0) = logit_with_entropy(0.2);
  x(0, 2) = logit_with_entropy(0.1);
  const double ec = l_ec(x, identity(4), ec_ctx, 0.05);

  const LossContext spce_ctx{{5, 2}, DistanceSpec{}, 1e-12};
  const double spce = l_spce(Matrix(7, 6, 0.4), Matrix(7, 8, 0.0), spce_ctx, 0.3);

  const double e1 = std::abs(mi - mi_oracle), e2 = std::abs(ec - ec_oracle),
               e3 = std::abs(spce - spce_oracle);
  const bool ok = e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6 && std::abs(mi_oracle + 0.15) < 5e-5 &&
                  std::abs(ec_oracle - 0.15) < 5e-5 && std::abs(spce_oracle - 0.3931) < 5e-5;
  return {ok, fmt("l_mi %.6f (oracle %.6f), l_ec %.6f (oracle %.6f), l_spce %.6f (oracle %.6f), tol 1e-6",
                  mi, mi_oracle, ec, ec_oracle, spce, spce_oracle)};
}

// ---- metric ---------------------------------------------------------------------------------

Outcome metric_check() {
  const double h = harmonic_mean(52.7, 74.1);
  return {std::abs(h - 61.6) <= 0.05, fmt("harmonic_mean(52.7, 74.1) = %.4f, want 61.6 +- 0.05", h)};
}

// ---- training-based criteria ----------------------------------------------------------------

SynthResult benchmark(std::uint64_t seed) {
  SynthConfig sc;
  sc.seed = seed;
  return synth_benchmark(sc);
}

TrainConfig defaults(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  return c;
}

Outcome ablation() {
  struct Arm {
    const char* name;
    double lambda1, lambda2, lambda3;
    bool marginal;
  };
  // Ent is the conditional-entropy part of the MI term alone, i.e. MI without the marginal.
  const Arm arms[] = {{"CE", 0, 0, 0, true},
                      {"+Ent", 0.05, 0, 0, false},
                      {"+MI", 0.05, 0, 0, true},
                      {"+EC", 0.05, 0.5, 0, true},
                      {"full", 0.05, 0.5, 0.05, true}};
  const std::uint64_t seeds[] = {41, 42, 43};
  const auto t0 = Clock::now();
  std::vector<double> mean_h;
  for (const Arm& arm : arms) {
    double sum = 0.0;
    for (std::uint64_t seed : seeds) {
      const SynthResult s = benchmark(seed);
      TrainConfig c = defaults(seed);
      c.loss.lambda1 = arm.lambda1;
      c.loss.lambda2 = arm.lambda2;
      c.loss.lambda3 = arm.lambda3;
      c.loss.mi_marginal = arm.marginal;
      sum += gzsl_report(train_deterministic(s.bundle, c).net, s.bundle, c.distance).h;
    }
    mean_h.push_back(sum / 3.0);
  }
  const double secs = seconds_since(t0);
  const bool margin = mean_h[4] - mean_h[0] >= 10.0;
  bool chain = true;
  for (std::size_t i = 1; i <= 3; ++i) chain = chain && mean_h[i] >= mean_h[i - 1] - 1.0;
  std::string detail = "mean H";
  for (std::size_t i = 0; i < mean_h.size(); ++i) detail += fmt(" %s %.1f", arms[i].name, mean_h[i]);
  detail += fmt("; full-CE %+.1f (need >= 10), chain %s (1-point tol), %.0fs (limit 300s)",
                mean_h[4] - mean_h[0], chain ? "ok" : "broken", secs);
  return {margin && chain && secs < 300.0, detail};
}

Outcome diagnostics() {
  const SynthResult s = benchmark(42);
  const auto diag_for = [&](auto tweak) {
    TrainConfig c = defaults(42);
    tweak(c);
    return compute_diagnostics(train_deterministic(s.bundle, c).net, s.bundle, c.distance);
  };
  const Diagnostics full = diag_for([](TrainConfig&) {});
  const Diagnostics no_mi = diag_for([](TrainConfig& c) { c.loss.lambda1 = 0; });
  const Diagnostics no_ec = diag_for([](TrainConfig& c) { c.loss.lambda2 = 0; });
  const Diagnostics no_spce = diag_for([](TrainConfig& c) { c.loss.lambda3 = 0; });
  const bool a = full.mi_target.regularized > no_mi.mi_target.regularized;
  const bool b = full.negative_gap_fraction < no_ec.negative_gap_fraction;
  const bool c = full.spce_mean < no_spce.spce_mean;
  return {a && b && c,
          fmt("(a) MI %.4f vs %.4f without %s; (b) negative gaps %.3f vs %.3f without %s; "
              "(c) spce %.4f vs %.4f without %s",
              full.mi_target.regularized, no_mi.mi_target.regularized, a ? "ok" : "FAIL",
              full.negative_gap_fraction, no_ec.negative_gap_fraction, b ? "ok" : "FAIL",
              full.spce_mean, no_spce.spce_mean, c ? "ok" : "FAIL")};
}

Outcome generated_data() {
  const SynthResult s = benchmark(42);
  const TrainConfig c = defaults(42);
  const GeneratedSet oracle = synth_generated(s, GeneratedKind::oracle, 300, 1042);
  const GeneratedSet noise = synth_generated(s, GeneratedKind::uniform_noise, 300, 1042);
  const double det_ts = gzsl_report(train_deterministic(s.bundle, c).net, s.bundle, c.distance).ts;
  const double gen_ts = gzsl_report(train_with_generated(s.bundle, oracle, c).net, s.bundle, c.distance).ts;
  TrainConfig one = c;
  one.max_epochs = 2;
  one.patience = 0;
  const TrainHistory h = train_with_generated(s.bundle, noise, one).history;
  // Selection runs at the start of each epoch, so epoch 2 sees the prototypes after epoch 1.
  const EpochRecord& after_first = h.records.at(1);
  const double rejected = 100.0 * static_cast<double>(after_first.gen_total - after_first.gen_selected) /
                          static_cast<double>(after_first.gen_total);
  const bool gain_ok = gen_ts - det_ts >= 3.0;
  const bool noise_ok = rejected >= 90.0;
  return {gain_ok && noise_ok,
          fmt("oracle: ts %.1f vs deterministic %.1f, gain %+.1f (need >= 3) %s; uniform noise: %.1f%% "
              "rejected after epoch 1 at margin4 %.2f (need >= 90) %s",
              gen_ts, det_ts, gen_ts - det_ts, gain_ok ? "ok" : "FAIL", rejected, c.loss.margin4,
              noise_ok ? "ok" : "FAIL")};
}

bool same_files(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> names;
  for (const auto& e : std::filesystem::directory_iterator(a)) names.push_back(e.path().filename());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(b)) ++count_b;
  if (names.size() != count_b) return false;
  for (const auto& n : names) {
    if (testing::read_bytes(a / n) != testing::read_bytes(b / n)) return false;
  }
  return true;
}

Outcome determinism() {
  const SynthResult s = benchmark(42);
  TrainConfig c = defaults(42);
  c.max_epochs = 5;
  testing::TempDir tmp("determinism");
  std::string reports[2];
  for (int run = 0; run < 2; ++run) {
    TrainResult r = train_deterministic(s.bundle, c);
    quantize_parameters(r.net);
    save_checkpoint(r.net, c, tmp / ("ckpt" + std::to_string(run)));
    const EvalReport rep = gzsl_report(r.net, s.bundle, c.distance);
    const Diagnostics d = compute_diagnostics(r.net, s.bundle, c.distance);
    reports[run] = report_to_json(rep, &d) + history_csv(r.history);
  }
  const bool ckpt = same_files(tmp / "ckpt0", tmp / "ckpt1");
  const bool rep = reports[0] == reports[1];
  return {ckpt && rep, fmt("checkpoint files %s, report and history %s", ckpt ? "identical" : "DIFFER",
                           rep ? "identical" : "DIFFER")};
}

Outcome awa2() {
  const char* dir = std::getenv("GZSL_AWA2_DIR");
  const DatasetBundle b = load_bundle(dir);
  const TrainConfig c;
  const double h = gzsl_report(train_deterministic(b, c).net, b, c.distance).h;
  return {std::abs(h - 61.6) <= 4.0, fmt("H %.1f, want 61.6 +- 4.0", h)};
}

}  // namespace
}  // namespace pvzsl

int main() {
  using pvzsl::Criterion;
  const std::vector<Criterion> criteria = {
      {"gradient suite", pvzsl::gradient_suite},
      {"entropy invariants", pvzsl::entropy_invariants},
      {"loss closed forms", pvzsl::closed_forms},
      {"harmonic mean", pvzsl::metric_check},
      {"ablation trend", pvzsl::ablation},
      {"diagnostic trends", pvzsl::diagnostics},
      {"generated-data cooperation", pvzsl::generated_data},
      {"determinism", pvzsl::determinism},
      {"AwA2 benchmark", pvzsl::awa2, true},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (c.optional && !std::getenv("GZSL_AWA2_DIR")) {
      std::printf("[SKIP] %s: GZSL_AWA2_DIR not set (optional)\n", c.name.c_str());
      continue;
    }
    pvzsl::Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.passed ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.passed && !c.optional) ++failures;
  }
  std::printf("%d required criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
