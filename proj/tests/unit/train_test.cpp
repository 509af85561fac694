// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pvzsl/data/synth.hpp"
#include "pvzsl/eval/metrics.hpp"
#include "pvzsl/ndcore/errors.hpp"
#include "pvzsl/train/train.hpp"
#include "support.hpp"

namespace pvzsl {
namespace {

using testing::TempDir;

SynthResult small_synth(std::uint64_t seed = 42) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_per_class = 30;
  return synth_benchmark(cfg);
}

TrainConfig small_config() {
  TrainConfig c;
  c.model.hidden = 32;
  c.batch_size = 64;
  c.max_epochs = 4;
  c.patience = 10;
  return c;
}

bool same_parameters(const EmbedNet& a, const EmbedNet& b) {
  const auto pa = a.params();
  const auto pb = b.params();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!(pa[i]->value == pb[i]->value)) return false;
  }
  return true;
}

TEST(Config, DefaultsRoundTripThroughJson) {
  const TrainConfig d;
  EXPECT_EQ(resolve_config("{}"), d);
  EXPECT_EQ(resolve_config(config_to_json(d)), d);
  EXPECT_EQ(d.loss.lambda2, 0.5);
  EXPECT_EQ(d.loss.lambda3, 0.05);
  EXPECT_EQ(d.loss.margin3, 0.3);
  EXPECT_EQ(d.distance.m1, 0.5);
  EXPECT_EQ(d.distance.m2, 1.0);
  EXPECT_EQ(d.optim.lr, 1e-3);
  EXPECT_EQ(d.batch_size, 512u);
  EXPECT_EQ(d.model.hidden, 2048u);
}

TEST(Config, PartialDocumentsAndOverrides) {
  const TrainConfig c = resolve_config(R"({"loss": {"lambda1": 0.5}, "seed": 7})",
                                       {{"model.hidden", "64"}, {"mode", "zsl"}, {"distance.kind", "cosine"}});
  EXPECT_EQ(c.loss.lambda1, 0.5);
  EXPECT_EQ(c.loss.lambda2, 0.5);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.model.hidden, 64u);
  EXPECT_EQ(c.mode, TrainMode::zsl);
  EXPECT_EQ(c.distance.kind, DistanceKind::cosine);
}

TEST(Config, RejectsUnknownKeysBadTypesAndRanges) {
  EXPECT_THROW(resolve_config(R"({"loss": {"lambda9": 1}})"), ValidationError);
  EXPECT_THROW(resolve_config(R"({"optimiser": {}})"), ValidationError);
  EXPECT_THROW(resolve_config(R"({"batch_size": "big"})"), ValidationError);
  EXPECT_THROW(resolve_config(R"({"batch_size": -3})"), ValidationError);
  EXPECT_THROW(resolve_config("{}", {{"loss.nope", "1"}}), ValidationError);
  EXPECT_THROW(resolve_config(R"({"model": {"dropout_rate": 1.0}})"), ValidationError);
  EXPECT_THROW(resolve_config(R"({"optim": {"lr": 0}})"), ValidationError);
  EXPECT_THROW(resolve_config(R"({"distance": {"kind": "l1"}})"), ValidationError);
  EXPECT_THROW(resolve_config("not json"), ValidationError);
}

TEST(Config, ShippedDefaultFileMatchesBuiltInDefaults) {
  std::ifstream in(std::string(PVZSL_CONFIG_DIR) + "/default.json");
  ASSERT_TRUE(in.good());
  const auto shipped = nlohmann::json::parse(in);
  EXPECT_EQ(shipped, nlohmann::json::parse(config_to_json(TrainConfig{})));
}

TEST(Train, ZeroEpochsReturnsTheInitializedNet) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.max_epochs = 0;
  const TrainResult r = train_deterministic(s.bundle, c);
  EXPECT_TRUE(r.history.records.empty());
  EXPECT_EQ(r.history.best_epoch, 0u);
  EXPECT_EQ(r.net.hidden_dim(), 32u);
  EXPECT_NO_THROW(gzsl_report(r.net, s.bundle, c.distance));
}

TEST(Train, IsBitwiseDeterministicAndSeedSensitive) {
  const auto s = small_synth();
  const TrainConfig c = small_config();
  const TrainResult a = train_deterministic(s.bundle, c);
  const TrainResult b = train_deterministic(s.bundle, c);
  EXPECT_TRUE(same_parameters(a.net, b.net));
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(history_csv(a.history), history_csv(b.history));
  TrainConfig other = c;
  other.seed = 43;
  EXPECT_FALSE(same_parameters(a.net, train_deterministic(s.bundle, other).net));
}

TEST(Train, RecordsOneRowPerEvaluationWithMonotoneEpochs) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.max_epochs = 6;
  c.eval_every = 2;
  const TrainResult r = train_deterministic(s.bundle, c);
  ASSERT_EQ(r.history.records.size(), 3u);
  EXPECT_EQ(r.history.records[0].epoch, 2u);
  EXPECT_EQ(r.history.records[2].epoch, 6u);
  for (const auto& rec : r.history.records) {
    EXPECT_TRUE(rec.val_tr.has_value());
    EXPECT_TRUE(rec.losses.count("total"));
    EXPECT_TRUE(rec.losses.count("ce"));
  }
  const std::string csv = history_csv(r.history);
  EXPECT_EQ(csv.substr(0, 6), "epoch,");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Train, PatienceStopsEarly) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.max_epochs = 200;
  c.patience = 1;
  const TrainResult r = train_deterministic(s.bundle, c);
  EXPECT_TRUE(r.history.stopped_early);
  EXPECT_LT(r.history.records.size(), 200u);
  EXPECT_LE(r.history.best_epoch, r.history.records.back().epoch);
}

TEST(Train, LearnsSourceClasses) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.model.hidden = 256;
  c.max_epochs = 30;
  c.patience = 30;
  const TrainResult r = train_deterministic(s.bundle, c);
  EXPECT_GT(gzsl_report(r.net, s.bundle, c.distance).tr, 40.0);
}

TEST(Train, ZeroGammaGeneratedRunEqualsDeterministicRun) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.loss.gamma1 = c.loss.gamma2 = 0.0;
  const GeneratedSet gen = synth_generated(s, GeneratedKind::oracle, 20, 5);
  const TrainResult det = train_deterministic(s.bundle, c);
  const TrainResult with_gen = train_with_generated(s.bundle, gen, c);
  EXPECT_TRUE(same_parameters(det.net, with_gen.net));
}

TEST(Train, GeneratedRunReportsSelectionCounts) {
  const auto s = small_synth();
  const TrainConfig c = small_config();
  const GeneratedSet gen = synth_generated(s, GeneratedKind::uniform_noise, 20, 5);
  const TrainResult r = train_with_generated(s.bundle, gen, c);
  for (const auto& rec : r.history.records) {
    EXPECT_EQ(rec.gen_total, 80u);
    EXPECT_LE(rec.gen_selected, rec.gen_total);
  }
}

TEST(Train, ZslModeSelectsByTargetValidation) {
  SynthConfig sc;
  sc.n_per_class = 30;
  sc.val_unseen_frac = 0.2;
  const DatasetBundle b = synth_benchmark(sc).bundle;
  TrainConfig c = small_config();
  c.mode = TrainMode::zsl;
  const TrainResult r = train_deterministic(b, c);
  for (const auto& rec : r.history.records) {
    ASSERT_TRUE(rec.val_zsl.has_value());
    EXPECT_EQ(rec.val_metric, *rec.val_zsl);
  }
}

TEST(Train, InvalidConfigIsRejected) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.batch_size = 1;
  EXPECT_THROW(train_deterministic(s.bundle, c), ValidationError);
}

TEST(Train, SourceOnlyBundleValidatesButDoesNotTrain) {
  DatasetBundle b = small_synth().bundle;
  const std::size_t s = b.layout.num_source;
  const std::size_t n = s * 30;
  std::vector<std::size_t> rows(n), classes(s);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::iota(classes.begin(), classes.end(), std::size_t{0});
  b.x = gather_rows(b.x, rows);
  b.y.resize(n);
  b.v = gather_rows(b.v, classes);
  b.layout.num_target = 0;
  b.test_unseen_idx.clear();
  EXPECT_NO_THROW(validate_bundle(b));
  EXPECT_THROW(train_deterministic(b, small_config()), ValidationError);
}

TEST(Grid, PicksBestValidationMetric) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.max_epochs = 3;
  const std::vector<double> grid = {0.05, 1.0};
  const GridResult g = grid_search_lambda1(s.bundle, c, grid);
  ASSERT_EQ(g.table.size(), 2u);
  const GridRow& best = g.table[0].val_metric >= g.table[1].val_metric ? g.table[0] : g.table[1];
  EXPECT_EQ(g.best_lambda1, best.lambda1);
}

TEST(Checkpoint, RoundTripEqualsQuantizedNet) {
  const auto s = small_synth();
  const TrainConfig c = small_config();
  TrainResult r = train_deterministic(s.bundle, c);
  TempDir tmp("ckpt");
  save_checkpoint(r.net, c, tmp.path());
  const Checkpoint back = load_checkpoint(tmp.path());
  quantize_parameters(r.net);
  EXPECT_TRUE(same_parameters(back.net, r.net));
  EXPECT_EQ(back.config, c);
  EXPECT_EQ(report_to_json(gzsl_report(back.net, s.bundle, c.distance)),
            report_to_json(gzsl_report(r.net, s.bundle, c.distance)));
}

TEST(Checkpoint, CorruptionIsFormatError) {
  const auto s = small_synth();
  TrainConfig c = small_config();
  c.max_epochs = 0;
  const TrainResult r = train_deterministic(s.bundle, c);
  TempDir tmp("ckpt");
  save_checkpoint(r.net, c, tmp / "a");
  std::filesystem::remove(tmp / "a" / "layer2.weight.gzs");
  EXPECT_THROW(load_checkpoint(tmp / "a"), FormatError);
  save_checkpoint(r.net, c, tmp / "b");
  std::ofstream(tmp / "b" / "checkpoint.json") << R"({"format": "GZS1-checkpoint", "version": 1})";
  EXPECT_THROW(load_checkpoint(tmp / "b"), FormatError);
  EXPECT_THROW(load_checkpoint(tmp / "missing"), FormatError);
}

}  // namespace
}  // namespace pvzsl
