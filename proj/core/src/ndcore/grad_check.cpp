// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/ndcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pvzsl {

bool GradCheckReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << (e.passed ? "ok   " : "FAIL ") << e.name << " max_rel=" << e.max_rel_error << " @"
       << e.worst_index << " (analytic " << e.analytic << ", numeric " << e.numeric << ")\n";
  }
  return os.str();
}

GradCheckReport grad_check(std::span<ParamBlock* const> params, const std::function<double()>& loss,
                           const GradCheckOptions& opts) {
  GradCheckReport report;
  for (ParamBlock* p : params) {
    GradCheckEntry entry;
    entry.name = p->name;
    auto value = p->value.values();
    auto grad = p->grad.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + opts.h;
      const double up = loss();
      value[i] = saved - opts.h;
      const double down = loss();
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.h);
      const double analytic = grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), opts.scale_floor});
      double rel = std::abs(analytic - numeric) / denom;
      if (std::isnan(rel)) rel = std::numeric_limits<double>::infinity();
      if (i == 0 || rel > entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_index = i;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
    }
    entry.passed = entry.max_rel_error <= opts.tol;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace pvzsl
