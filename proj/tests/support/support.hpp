// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pvzsl/losses/losses.hpp"
#include "pvzsl/ndcore/grad_check.hpp"
#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/ndcore/rng.hpp"
#include "pvzsl/proto/embed_net.hpp"

namespace pvzsl::testing {

/// Q=8, hidden=12, P=16, S=5, T=3, N=20, dropout off.
struct TinyInstance {
  EmbedNet net;
  Matrix v;
  LabeledPoints batch;
  GeneratedSet gen;
  LossContext ctx;
};

TinyInstance make_tiny(std::uint64_t seed);

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0);
Matrix normal_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Textbook i-j-k product, kept deliberately separate from the library kernel.
Matrix naive_matmul(const Matrix& a, const Matrix& b);

/// -Σ p ln p / log2(K) evaluated term by term with no clamping (0·ln 0 := 0).
double oracle_reg_entropy(const std::vector<double>& p);

/// A scalar function of the prototype matrix with an optional analytic gradient sink.
using ZLoss = std::function<double(const Matrix& z, Matrix* dz)>;

/// Analytic gradient (one backward pass through `net`) against central differences.
GradCheckReport check_through_net(EmbedNet& net, const Matrix& v, const ZLoss& loss,
                                  const GradCheckOptions& opts = {});

struct NamedGradCheck {
  std::string name;
  GradCheckReport report;
};

/// Every seen-data and generated-data term on the tiny instance, each checked through the net.
std::vector<NamedGradCheck> loss_gradient_suite(std::uint64_t seed, const GradCheckOptions& opts = {});

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::vector<unsigned char> read_bytes(const std::filesystem::path& p);
void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes);
std::string read_file(const std::filesystem::path& p);

}  // namespace pvzsl::testing
