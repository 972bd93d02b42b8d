// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#pragma once

#include <span>
#include <vector>

namespace ssaf {

// sgn with sgn(0) = 0.
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Log sparsity penalty H(w) = sum_m ln(1 + |w_m| / xi).
struct LogPenalty {
  double xi = 0.05;

  explicit LogPenalty(double shrinkage);

  double value(std::span<const double> w) const;

  // H'(w_m) = sgn(w_m) / (xi + |w_m|); zero entries map to zero.
  double subgradient(double w) const { return sgn(w) / (xi + (w < 0.0 ? -w : w)); }
  void subgradient(std::span<const double> w, std::span<double> out) const;
};

double penalty_value(const LogPenalty& p, std::span<const double> w);
std::vector<double> penalty_subgradient(const LogPenalty& p, std::span<const double> w);

}  // namespace ssaf
