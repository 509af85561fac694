// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/ndcore/adam.hpp"

#include <cmath>
#include <string>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

void adam_step(std::span<ParamBlock* const> params, const AdamConfig& cfg, std::uint64_t t) {
  if (t == 0) throw ValidationError("adam_step: step count must be >= 1");
  for (const ParamBlock* p : params) {
    if (!p->consistent()) throw DimensionError("adam_step: inconsistent block '" + p->name + "'");
    if (!p->grad.all_finite()) {
      throw NumericError("adam_step: non-finite gradient in '" + p->name + "'");
    }
  }
  const double td = static_cast<double>(t);
  const double bias1 = 1.0 - std::pow(cfg.beta1, td);
  const double bias2 = 1.0 - std::pow(cfg.beta2, td);
  for (ParamBlock* p : params) {
    auto value = p->value.values();
    auto grad = p->grad.values();
    auto m = p->adam_m.values();
    auto v = p->adam_v.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    p->zero_grad();
  }
}

}  // namespace pvzsl
