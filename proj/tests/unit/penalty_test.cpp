// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ssaf/errors.hpp"
#include "ssaf/penalty.hpp"

namespace {

using namespace ssaf;

TEST(LogPenalty, ValueExamples) {
  const LogPenalty p(0.05);
  EXPECT_EQ(penalty_value(p, std::vector<double>(7, 0.0)), 0.0);
  for (double xi : {1e-3, 0.05, 2.0}) {
    const LogPenalty q(xi);
    EXPECT_NEAR(penalty_value(q, std::vector<double>{xi}), std::log(2.0), 1e-15);
  }
  const std::vector<double> w = {0.1, -0.2, 0.0};
  const double direct = std::log(1.0 + 0.1 / 0.05) + std::log(1.0 + 0.2 / 0.05);
  EXPECT_NEAR(penalty_value(p, w), direct, 1e-14);
  EXPECT_NEAR(penalty_value(p, w), std::log(15.0), 1e-14);
}

TEST(LogPenalty, SubgradientExamples) {
  const LogPenalty p(0.05);
  EXPECT_EQ(penalty_subgradient(p, std::vector<double>(4, 0.0)), std::vector<double>(4, 0.0));
  EXPECT_NEAR(p.subgradient(0.05), 10.0, 1e-12);
  EXPECT_NEAR(p.subgradient(-0.05), -10.0, 1e-12);
}

TEST(LogPenalty, SubgradientIsOddAndBounded) {
  const LogPenalty p(0.05);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int t = 0; t < 10000; ++t) {
    const double x = dist(rng);
    EXPECT_EQ(p.subgradient(-x), -p.subgradient(x));
    EXPECT_LE(std::abs(p.subgradient(x)), 1.0 / p.xi);
  }
}

TEST(LogPenalty, SubgradientIsTheDerivativeAwayFromZero) {
  const LogPenalty p(0.05);
  for (double x : {-0.7, -0.03, 0.01, 0.2, 3.0}) {
    const double h = 1e-6;
    const double numeric =
        (p.value(std::vector<double>{x + h}) - p.value(std::vector<double>{x - h})) / (2.0 * h);
    EXPECT_NEAR(p.subgradient(x), numeric, 1e-5 * (1.0 + std::abs(numeric)));
  }
}

TEST(LogPenalty, RejectsNonpositiveShrinkage) {
  EXPECT_THROW(LogPenalty(0.0), ParameterError);
  EXPECT_THROW(LogPenalty(-1.0), ParameterError);
}

// The log penalty is concave in |w_m|, so the convex subgradient inequality
// (w_opt - w)^T H'(w) <= H(w_opt) - H(w) cannot hold in general. Its
// violation rate is recorded; on pairs sharing signs per coordinate the
// concave form, with the inequality reversed, holds exactly.
TEST(LogPenalty, SubgradientInequalityViolationRate) {
  const LogPenalty p(0.05);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::size_t M = 16;
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> w(M), wo(M);
    for (std::size_t m = 0; m < M; ++m) {
      w[m] = dist(rng);
      wo[m] = dist(rng);
    }
    double lin = 0.0;
    for (std::size_t m = 0; m < M; ++m) lin += (wo[m] - w[m]) * p.subgradient(w[m]);
    if (lin > p.value(wo) - p.value(w)) ++violations;

    // Same-sign pair: flip wo's signs onto w's orthant.
    std::vector<double> same(M);
    for (std::size_t m = 0; m < M; ++m) same[m] = std::copysign(std::abs(wo[m]), w[m]);
    double lin_same = 0.0;
    for (std::size_t m = 0; m < M; ++m) lin_same += (same[m] - w[m]) * p.subgradient(w[m]);
    EXPECT_GE(lin_same, p.value(same) - p.value(w) - 1e-12);
  }
  ::testing::Test::RecordProperty("violation_rate", std::to_string(violations / 1000.0));
  EXPECT_GT(violations, 0);
}

}  // namespace
