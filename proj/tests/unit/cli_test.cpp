// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "pvzsl/data/bundle.hpp"
#include "support.hpp"

namespace pvzsl {
namespace {

using testing::TempDir;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pvzsl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

nlohmann::json read_json(const std::filesystem::path& p) {
  return nlohmann::json::parse(testing::read_file(p));
}

// One small bundle shared by the tests below.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli");
    const CliRun r = run_cli({"synth", "--seed", "42", "--per-class", "30", "--gen", "oracle",
                              "--gen-per-class", "10", "--out", (dir_->path() / "bench").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string bench() { return (dir_->path() / "bench").string(); }
  static std::string out(const std::string& name) { return (dir_->path() / name).string(); }

  static TempDir* dir_;
};

TempDir* CliTest::dir_ = nullptr;

TEST(Cli, InspectPrintsDefaultBenchmarkDims) {
  TempDir tmp("cli-inspect");
  ASSERT_EQ(run_cli({"synth", "--seed", "42", "--out", (tmp / "bench").string()}).code, 0);
  const CliRun r = run_cli({"inspect", (tmp / "bench").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("N=2400 P=32 Q=16 S=12 T=4"), std::string::npos) << r.out;
  const auto run = read_json(tmp / "bench" / "run.json");
  EXPECT_EQ(run.at("command"), "synth");
  EXPECT_EQ(run.at("synth").at("seed"), 42);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  const CliRun bogus = run_cli({"synth", "--bogus", "--out", "x"});
  EXPECT_EQ(bogus.code, 2);
  EXPECT_NE(bogus.err.find("--seed"), std::string::npos) << bogus.err;
  EXPECT_EQ(run_cli({"train"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, MissingInputsExitWithTwo) {
  TempDir tmp("cli-missing");
  EXPECT_EQ(run_cli({"inspect", (tmp / "nothing").string()}).code, 2);
  EXPECT_EQ(run_cli({"train", "--data", (tmp / "nothing").string(), "--out", (tmp / "o").string()}).code, 2);
}

TEST_F(CliTest, InspectBundleAndCheckpoint) {
  CliRun r = run_cli({"inspect", bench()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("N=480 P=32 Q=16 S=12 T=4"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("preprocessing=none"), std::string::npos) << r.out;
}

TEST_F(CliTest, BadConfigKeyExitsWithTwo) {
  const CliRun r = run_cli({"train", "--data", bench(), "--set", "loss.nope=1", "--out", out("badcfg")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("loss.nope"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"train", "--data", bench(), "--set", "novalue", "--out", out("badset")}).code, 2);
}

TEST_F(CliTest, TrainEvalSelectPipeline) {
  const std::string train_out = out("train");
  CliRun r = run_cli({"train", "--data", bench(), "--set", "max_epochs=2", "--set", "model.hidden=32",
                      "--set", "batch_size=64", "--out", train_out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("H="), std::string::npos);
  for (const char* f : {"run.json", "report.json", "history.csv", "entropy_gaps.csv",
                        "checkpoint/checkpoint.json"}) {
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(train_out) / f)) << f;
  }
  const auto run = read_json(std::filesystem::path(train_out) / "run.json");
  EXPECT_EQ(run.at("config").at("model").at("hidden"), 32);
  EXPECT_EQ(run.at("config").at("max_epochs"), 2);
  EXPECT_TRUE(run.contains("best_epoch"));

  const std::string eval_out = out("eval");
  r = run_cli({"eval", "--data", bench(), "--checkpoint", train_out + "/checkpoint", "--out", eval_out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::read_file(eval_out + "/report.json"), testing::read_file(train_out + "/report.json"));

  const std::string sel_out = out("select");
  r = run_cli({"select", "--data", bench(), "--checkpoint", train_out + "/checkpoint", "--gen",
               bench() + "/generated", "--margin4", "0.7", "--out", sel_out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sel = read_json(sel_out + "/select.json");
  EXPECT_EQ(sel.at("total"), 40);
  EXPECT_EQ(sel.at("kept").get<int>() + sel.at("rejected").get<int>(), 40);
  EXPECT_EQ(sel.at("kept"), 40);  // margin4 above ln 2 keeps everything

  r = run_cli({"inspect", train_out + "/checkpoint"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Q=16 hidden=32 P=32"), std::string::npos) << r.out;
}

TEST_F(CliTest, TrainGenAndGrid) {
  CliRun r = run_cli({"train-gen", "--data", bench(), "--gen", bench() + "/generated", "--set",
                      "max_epochs=1", "--set", "model.hidden=16", "--out", out("tg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(testing::read_file(out("tg") + "/history.csv").find("gen_selected"), std::string::npos);
  r = run_cli({"grid", "--data", bench(), "--grid", "0.05,0.5", "--set", "max_epochs=1", "--set",
               "model.hidden=16", "--out", out("grid")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string grid = testing::read_file(out("grid") + "/grid.csv");
  EXPECT_EQ(grid.substr(0, grid.find('\n')), "lambda1,val_metric,best_epoch");
  const auto run = read_json(out("grid") + "/run.json");
  const double best = run.at("best_lambda1").get<double>();
  EXPECT_TRUE(best == 0.05 || best == 0.5);
}

TEST_F(CliTest, ConfigFileIsMergedBeforeOverrides) {
  TempDir tmp("cli-cfg");
  const auto cfg = tmp / "cfg.json";
  std::ofstream(cfg) << R"({"max_epochs": 0, "model": {"hidden": 8}, "loss": {"lambda1": 0.5}})";
  const CliRun r = run_cli({"train", "--data", bench(), "--config", cfg.string(), "--set",
                            "loss.lambda1=0.25", "--out", (tmp / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto run = read_json(tmp / "o" / "run.json");
  EXPECT_EQ(run.at("config").at("loss").at("lambda1"), 0.25);
  EXPECT_EQ(run.at("config").at("model").at("hidden"), 8);
}

TEST_F(CliTest, GeneratedSetWithWrongWidthIsRejected) {
  TempDir tmp("cli-gen");
  save_generated(GeneratedSet{Matrix(2, 5, 0.1), {13, 14}}, tmp / "gen");
  const CliRun r = run_cli({"train-gen", "--data", bench(), "--gen", (tmp / "gen").string(), "--set",
                            "max_epochs=0", "--out", (tmp / "o").string()});
  EXPECT_EQ(r.code, 2);
}

// An untrained net carries no class information. Its per-class accuracy must stay at or
// below chance level (100/K); ties at the zero clamp all go to class 1, which drives it lower.
TEST(Cli, UntrainedCheckpointScoresNoBetterThanChance) {
  TempDir tmp("cli-chance");
  ASSERT_EQ(run_cli({"synth", "--seed", "42", "--out", (tmp / "bench").string()}).code, 0);
  const double chance = 100.0 / 16.0;
  double ts_sum = 0, tr_sum = 0;
  constexpr int seeds = 5;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto o = tmp / ("u" + std::to_string(seed));
    const CliRun r = run_cli({"train", "--data", (tmp / "bench").string(), "--set", "max_epochs=0",
                              "--set", "model.hidden=256", "--set", "seed=" + std::to_string(seed),
                              "--out", o.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rep = read_json(o / "report.json");
    ts_sum += rep.at("ts").get<double>();
    tr_sum += rep.at("tr").get<double>();
  }
  // Across 16 balanced classes a label-blind predictor averages 100/K.
  EXPECT_LE(ts_sum / seeds, 2.0 * chance);
  EXPECT_LE(tr_sum / seeds, 2.0 * chance);
}

}  // namespace
}  // namespace pvzsl
