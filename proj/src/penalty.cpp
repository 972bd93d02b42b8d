// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/penalty.hpp"

#include <cmath>

#include "ssaf/errors.hpp"

namespace ssaf {

LogPenalty::LogPenalty(double shrinkage) : xi(shrinkage) {
  if (!(xi > 0.0)) throw ParameterError("log penalty shrinkage xi must be > 0");
}

double LogPenalty::value(std::span<const double> w) const {
  double h = 0.0;
  for (double x : w) h += std::log1p(std::abs(x) / xi);
  return h;
}

void LogPenalty::subgradient(std::span<const double> w, std::span<double> out) const {
  if (out.size() != w.size()) throw ParameterError("subgradient buffer size mismatch");
  for (std::size_t m = 0; m < w.size(); ++m) out[m] = subgradient(w[m]);
}

double penalty_value(const LogPenalty& p, std::span<const double> w) { return p.value(w); }

std::vector<double> penalty_subgradient(const LogPenalty& p, std::span<const double> w) {
  std::vector<double> g(w.size());
  p.subgradient(w, g);
  return g;
}

}  // namespace ssaf
