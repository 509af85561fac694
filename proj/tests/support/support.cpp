// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

namespace pvzsl::testing {

TinyInstance make_tiny(std::uint64_t seed) {
  constexpr std::size_t q = 8, hidden = 12, p = 16, s = 5, t = 3, n = 20;
  Rng rng(seed);
  EmbedNetConfig nc;
  nc.hidden = hidden;
  nc.dropout_rate = 0.0;
  EmbedNet net(q, p, nc);
  net.initialize(rng);
  TinyInstance inst{std::move(net), random_matrix(s + t, q, rng, 0.0, 1.0), {}, {},
                    LossContext{{s, t}, DistanceSpec{}, 1e-12}};
  inst.batch.x = normal_matrix(n, p, rng);
  for (std::size_t i = 0; i < n; ++i) inst.batch.y.push_back(static_cast<ClassId>(1 + i % s));
  inst.gen.x = normal_matrix(n, p, rng);
  for (std::size_t i = 0; i < n; ++i) inst.gen.y.push_back(static_cast<ClassId>(s + 1 + i % t));
  return inst;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(lo, hi);
  return m;
}

Matrix normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

double oracle_reg_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h / std::log2(static_cast<double>(p.size()));
}

GradCheckReport check_through_net(EmbedNet& net, const Matrix& v, const ZLoss& loss,
                                  const GradCheckOptions& opts) {
  net.zero_grad();
  const ForwardCache cache = forward_layers(net, v);
  Matrix dz = Matrix::zeros_like(cache.output);
  loss(cache.output, &dz);
  backward_layers(net, cache, dz);
  return grad_check(net.params(), [&] { return loss(forward_layers(net, v).output, nullptr); },
                    opts);
}

std::vector<NamedGradCheck> loss_gradient_suite(std::uint64_t seed, const GradCheckOptions& opts) {
  TinyInstance inst = make_tiny(seed);
  const LossConfig cfg;
  const auto& ctx = inst.ctx;
  const auto& b = inst.batch;
  const auto& g = inst.gen;
  const std::vector<std::pair<std::string, ZLoss>> terms = {
      {"L_CE", [&](const Matrix& z, Matrix* dz) { return l_ce(b, z, ctx, {dz}); }},
      {"L_Ent",
       [&](const Matrix& z, Matrix* dz) { return l_ent(b.x, z, ctx, cfg.margin1, {dz}); }},
      {"L_MI",
       [&](const Matrix& z, Matrix* dz) {
         return l_mi(b.x, z, ctx, cfg.lambda0, cfg.margin1, true, {dz});
       }},
      {"L_EC", [&](const Matrix& z, Matrix* dz) { return l_ec(b.x, z, ctx, cfg.margin2, {dz}); }},
      // A zero margin keeps the hinge open for every target class of the random instance.
      {"L_SPCE", [&](const Matrix& z, Matrix* dz) { return l_spce(inst.v, z, ctx, 0.0, {dz}); }},
      {"L~_CE", [&](const Matrix& z, Matrix* dz) { return l_ce_gen(g, z, ctx, {dz}).value; }},
      {"L~_MI",
       [&](const Matrix& z, Matrix* dz) {
         return l_mi_gen(g.x, z, ctx, cfg.lambda0, cfg.margin1, {dz});
       }},
  };
  std::vector<NamedGradCheck> out;
  for (const auto& [name, fn] : terms) {
    out.push_back({name, check_through_net(inst.net, inst.v, fn, opts)});
  }
  return out;
}

namespace {
std::atomic<int> temp_counter{0};
}

TempDir::TempDir(const std::string& tag) {
  path_ = std::filesystem::temp_directory_path() /
          ("pvzsl-" + tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(temp_counter.fetch_add(1)));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pvzsl::testing
