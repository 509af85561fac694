// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "pvzsl/data/synth.hpp"
#include "pvzsl/eval/metrics.hpp"
#include "pvzsl/train/train.hpp"

namespace pvzsl {
namespace {

void BM_TrainEpoch(benchmark::State& state) {
  const SynthResult s = synth_benchmark(SynthConfig{});
  TrainConfig cfg;
  cfg.max_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_deterministic(s.bundle, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_GzslReport(benchmark::State& state) {
  const SynthResult s = synth_benchmark(SynthConfig{});
  TrainConfig cfg;
  cfg.max_epochs = 0;
  const TrainResult r = train_deterministic(s.bundle, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(gzsl_report(r.net, s.bundle, cfg.distance));
}
BENCHMARK(BM_GzslReport)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pvzsl
