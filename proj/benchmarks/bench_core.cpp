// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "pvzsl/losses/losses.hpp"
#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/ndcore/rng.hpp"
#include "pvzsl/proto/embed_net.hpp"
#include "pvzsl/proto/prob_vector.hpp"

namespace pvzsl {
namespace {

Matrix random(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random(n, n, rng), b = random(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);

// C×Q attributes through a Q→H→P net, the shape of one training step on the default benchmark
// (C=16, Q=16, P=32) at a given hidden width.
void BM_ForwardBackward(benchmark::State& state) {
  EmbedNetConfig cfg;
  cfg.hidden = static_cast<std::size_t>(state.range(0));
  EmbedNet net(16, 32, cfg);
  Rng rng(2);
  net.initialize(rng);
  const Matrix v = random(16, 16, rng);
  const Matrix dz = random(16, 32, rng);
  for (auto _ : state) {
    const ForwardCache cache = forward_layers(net, v, true, rng);
    backward_layers(net, cache, dz);
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(256)->Arg(2048);

void BM_PvMatrix(benchmark::State& state) {
  Rng rng(3);
  const ClassLayout layout{12, 4};
  const Matrix x = random(static_cast<std::size_t>(state.range(0)), 32, rng);
  const Matrix z = random(16, 32, rng);
  for (auto _ : state) benchmark::DoNotOptimize(pv_matrix(x, z, ClassSet::all(layout), DistanceSpec{}));
}
BENCHMARK(BM_PvMatrix)->Arg(512);

void BM_DeterministicLoss(benchmark::State& state) {
  Rng rng(4);
  const LossContext ctx{{12, 4}, DistanceSpec{}, 1e-12};
  LabeledPoints batch{random(512, 32, rng), {}};
  for (std::size_t i = 0; i < 512; ++i) batch.y.push_back(static_cast<ClassId>(1 + i % 12));
  const Matrix v = random(16, 16, rng);
  const Matrix z = random(16, 32, rng);
  const LossConfig cfg;
  Matrix dz(16, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deterministic_loss(batch, v, z, ctx, cfg, &dz));
  }
}
BENCHMARK(BM_DeterministicLoss);

}  // namespace
}  // namespace pvzsl
