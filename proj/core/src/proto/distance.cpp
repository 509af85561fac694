// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/proto/distance.hpp"

#include <algorithm>
#include <cmath>

#include "pvzsl/ndcore/errors.hpp"
#include "pvzsl/ndcore/matrix.hpp"

namespace pvzsl {

std::string_view to_string(DistanceKind kind) noexcept {
  switch (kind) {
    case DistanceKind::euclidean:
      return "euclidean";
    case DistanceKind::cosine:
      return "cosine";
    case DistanceKind::dot:
      return "dot";
    case DistanceKind::asym_dot:
      return "asym_dot";
  }
  return "unknown";
}

DistanceKind parse_distance_kind(std::string_view name) {
  if (name == "euclidean") return DistanceKind::euclidean;
  if (name == "cosine") return DistanceKind::cosine;
  if (name == "dot") return DistanceKind::dot;
  if (name == "asym_dot") return DistanceKind::asym_dot;
  throw ValidationError("unknown distance kind '" + std::string(name) + "'");
}

void DistanceSpec::validate() const {
  if (!(m1 > 0.0) || !(m2 > 0.0)) {
    throw ValidationError("distance factors m1, m2 must be > 0");
  }
}

namespace {

void require_same_length(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) {
    throw DimensionError("score: vector lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(z.size()));
  }
}

double checked_norm(std::span<const double> v) {
  const double n = std::sqrt(squared_norm(v));
  if (n == 0.0) throw NumericError("cosine score of a zero-norm vector");
  return n;
}

}  // namespace

double score(std::span<const double> x, std::span<const double> z, const DistanceSpec& spec,
             Side side) {
  require_same_length(x, z);
  switch (spec.kind) {
    case DistanceKind::euclidean: {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        acc += d * d;
      }
      return -acc;
    }
    case DistanceKind::cosine:
      return dot(x, z) / (checked_norm(x) * checked_norm(z));
    case DistanceKind::dot:
      return dot(x, z);
    case DistanceKind::asym_dot:
      return std::max(spec.factor(side) * dot(x, z), 0.0);
  }
  return 0.0;
}

void score_backward(std::span<const double> x, std::span<const double> z,
                    const DistanceSpec& spec, Side side, double upstream, std::span<double> dx,
                    std::span<double> dz) {
  require_same_length(x, z);
  const bool want_dx = !dx.empty();
  switch (spec.kind) {
    case DistanceKind::euclidean:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double g = 2.0 * upstream * (x[i] - z[i]);
        dz[i] += g;
        if (want_dx) dx[i] -= g;
      }
      return;
    case DistanceKind::cosine: {
      const double nx = checked_norm(x);
      const double nz = checked_norm(z);
      const double c = dot(x, z) / (nx * nz);
      for (std::size_t i = 0; i < x.size(); ++i) {
        dz[i] += upstream * (x[i] / (nx * nz) - c * z[i] / (nz * nz));
        if (want_dx) dx[i] += upstream * (z[i] / (nx * nz) - c * x[i] / (nx * nx));
      }
      return;
    }
    case DistanceKind::dot:
      for (std::size_t i = 0; i < x.size(); ++i) {
        dz[i] += upstream * x[i];
        if (want_dx) dx[i] += upstream * z[i];
      }
      return;
    case DistanceKind::asym_dot: {
      const double m = spec.factor(side);
      if (m * dot(x, z) <= 0.0) return;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dz[i] += upstream * m * x[i];
        if (want_dx) dx[i] += upstream * m * z[i];
      }
      return;
    }
  }
}

}  // namespace pvzsl
