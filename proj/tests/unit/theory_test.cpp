// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ssaf/errors.hpp"
#include "ssaf/experiment.hpp"
#include "ssaf/theory.hpp"

namespace {

using namespace ssaf;

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
const std::filesystem::path kData = SSAF_TEST_DATA_DIR;

std::shared_ptr<const EnsembleStats> white_stats(const FilterBank& bank, std::size_t M,
                                                 EnsembleOptions opt = {100, 1000}) {
  InputSpec in;
  in.kind = InputKind::kWhite;
  return std::make_shared<const EnsembleStats>(estimate_ensemble_stats(in, bank, M, 3, opt));
}

// Sparse M = 16 system identification model shared by several tests.
const TheoryModel& sparse_model() {
  static const TheoryModel model = [] {
    ExperimentConfig c;
    c.system.kind = SystemKind::kSparse;
    c.system.nonzero_count = 2;
    c.filter_length = 16;
    c.n_subbands = 4;
    c.seed = 3;
    c.theory.ensemble = {50, 1000};
    return theory_model_for(c, 0.05);
  }();
  return model;
}

TEST(Omega, Examples) {
  EXPECT_NEAR(omega_i(0.0, 1.0, {0.0, 1.0, 300000.0}), kSqrt2OverPi, 1e-12);
  EXPECT_NEAR(omega_i(0.0, 1.0, {1.0, 1.0, 3.0}), kSqrt2OverPi / 2.0, 1e-12);
  EXPECT_THROW(omega_i(0.0, 0.0, {0.0, 1.0, 1.0}), ParameterError);
}

TEST(Omega, MatchesPriceMonteCarlo) {
  // e_a ~ N(0, t), band noise is contaminated Gaussian with variance scale
  // ||h_i||^2 sigma_g2; E{sgn(e_a + v) e_a} / E{e_a^2} should equal Omega.
  const double t = 0.02, energy = 0.25;
  const CgNoiseSpec noise{0.05, 0.01, 50.0};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sb = std::sqrt(energy * noise.sigma_g2);
  const double si = std::sqrt(energy * noise.hbar * noise.sigma_g2);
  double num = 0.0, den = 0.0;
  for (int n = 0; n < 1'000'000; ++n) {
    const double ea = std::sqrt(t) * g(rng);
    double v = sb * g(rng);
    const double eta = si * g(rng);
    if (unit(rng) < noise.p_r) v += eta;
    num += oracle::sign(ea + v) * ea;
    den += ea * ea;
  }
  const double omega = omega_i(t, energy, noise);
  EXPECT_NEAR(num / den, omega, 0.03 * omega);
}

TEST(Omega, InfinityLimitDropsTrace) {
  const CgNoiseSpec noise{0.001, 1e-3, 300000.0};
  const std::vector<double> e = {0.25, 0.25};
  const std::vector<double> o = omega_infinity(e, noise);
  EXPECT_DOUBLE_EQ(o[0], omega_i(0.0, 0.25, noise));
}

TEST(GaussianMoments, ZeroMeanUnitVariance) {
  const GaussianMomentValues v = gaussian_moment_eval({0.0, 1.0}, 0.05);
  EXPECT_NEAR(v.abs_mean, 0.79788, 1e-5);
  EXPECT_EQ(v.sgn_mean, 0.0);
}

TEST(GaussianMoments, DeterministicLimit) {
  const GaussianMomentValues v = gaussian_moment_eval({1.0, 1e-12}, 0.05);
  EXPECT_NEAR(v.abs_mean, 1.0, 1e-9);
  EXPECT_NEAR(v.sgn_mean, 1.0, 1e-9);
  const GaussianMomentValues z = gaussian_moment_eval({-0.4, 0.0}, 0.05);
  EXPECT_EQ(z.abs_mean, 0.4);
  EXPECT_EQ(z.sgn_mean, -1.0);
  EXPECT_NEAR(z.h_mean, -1.0 / 0.45, 1e-12);
}

TEST(GaussianMoments, MatchMonteCarloInTheSmallSpreadRegime) {
  // sigma / xi = 0.04; see the decisions on where the approximations apply.
  const double mean = 0.3, sd = 0.2, xi = 5.0;
  const GaussianMomentValues v = gaussian_moment_eval({mean, sd * sd}, xi);
  const oracle::GaussianMomentMc mc = oracle::gaussian_moments_mc(mean, sd, xi, 10'000'000, 23);
  EXPECT_NEAR(v.abs_mean, mc.abs_mean.value, 0.01 * mc.abs_mean.value);
  EXPECT_NEAR(v.sgn_mean, mc.sgn_mean.value, 0.01 * mc.sgn_mean.value);
  EXPECT_NEAR(v.h_mean, mc.h_mean.value, 0.05 * std::abs(mc.h_mean.value));
  EXPECT_NEAR(v.h_phi_mean, mc.h_phi_mean.value, 0.05 * mc.h_phi_mean.value);
  EXPECT_NEAR(v.h_sq_mean, mc.h_sq_mean.value, 0.05 * mc.h_sq_mean.value);
}

TEST(GaussianMoments, RejectsNegativeVariance) {
  EXPECT_THROW(gaussian_moment_eval({0.0, -1.0}, 0.05), ParameterError);
  EXPECT_THROW(gaussian_moment_eval({0.0, 1.0}, 0.0), ParameterError);
}

TEST(Price, SignCorrelationIdentity) {
  for (double r : {-0.8, 0.1, 0.6}) {
    const oracle::MomentEstimate mc = oracle::price_mc(r, 1'000'000, 31);
    EXPECT_LE(std::abs(mc.value - kSqrt2OverPi * r), 3.0 * mc.std_error) << "r = " << r;
  }
}

TEST(Ensemble, WhiteFullbandAutocorrelationIsIdentity) {
  const auto s = white_stats(identity_bank(), 8);
  const Eigen::MatrixXd& R = s->R[0];
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) EXPECT_NEAR(R(a, b), a == b ? 1.0 : 0.0, 0.05);
}

TEST(Ensemble, WhiteSubbandStatsMatchLongFilterApproximations) {
  const std::size_t M = 32;
  const FilterBank bank = design_cosine_modulated(4, 32);
  const auto s = white_stats(bank, M);
  for (std::size_t i = 0; i < 4; ++i) {
    const double sigma = std::sqrt(s->band_power[i]);
    EXPECT_NEAR(s->A_check_mean[i].trace(), 1.0, 0.02);
    for (std::size_t m = 0; m < M; ++m) {
      EXPECT_NEAR(s->A_check_mean[i](m, m), 1.0 / M, 0.1 / M);
      EXPECT_NEAR(s->A_mean[i](m, m), sigma / std::sqrt(double(M)), 0.1 * sigma / std::sqrt(double(M)));
    }
  }
}

TEST(Ensemble, MatricesAreSymmetricAndRIsPsd) {
  InputSpec in;
  const auto s = estimate_ensemble_stats(in, design_cosine_modulated(4, 32), 16, 5, {20, 500});
  for (std::size_t i = 0; i < 4; ++i) {
    for (const Eigen::MatrixXd* m : {&s.A_mean[i], &s.A_check_mean[i], &s.R[i]}) {
      EXPECT_LE((*m - m->transpose()).norm(), 1e-8 * m->norm());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.R[i]);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * s.R[i].norm());
  }
}

TEST(Ensemble, SilentInputIsRejected) {
  InputSpec in;
  in.kind = InputKind::kWavFile;
  in.wav_path = (kData / "silence_pcm16.wav").string();
  EXPECT_THROW(estimate_ensemble_stats(in, design_cosine_modulated(2, 16), 4, 1, {2, 100}),
               ParameterError);
}

TEST(MeanRecursion, ZeroStepKeepsMean) {
  const TheoryModel& m = sparse_model();
  TheoryState s = TheoryState::initial(m.w_opt);
  for (int k = 0; k < 20; ++k) mean_step(s, m, 0.0, 0.0);
  EXPECT_EQ(s.mean_w_tilde, m.w_opt);
}

TEST(MeanRecursion, UnbiasedWithoutPenaltyBiasedWithIt) {
  const TheoryModel& m = sparse_model();
  TheoryState plain = TheoryState::initial(m.w_opt);
  TheoryState sparse = TheoryState::initial(m.w_opt);
  for (int k = 0; k < 20000; ++k) {
    mean_step(plain, m, 0.01, 0.0);
    mean_step(sparse, m, 0.01, 1e-4);
  }
  EXPECT_LT(plain.mean_w_tilde.norm(), 1e-3 * m.w_opt.norm());
  EXPECT_GT(sparse.mean_w_tilde.norm(), 1e-3 * m.w_opt.norm());
}

TEST(MeanSquareRecursion, ZeroStepKeepsMsd) {
  const TheoryModel& m = sparse_model();
  const std::vector<double> msd = theory_msd_trajectory(m, 0.0, 0.0, 50);
  ASSERT_EQ(msd.size(), 51u);
  for (double x : msd) EXPECT_NEAR(x, m.w_opt.squaredNorm(), 1e-14);
}

TEST(MeanSquareRecursion, SymmetricAndTraceIsMsd) {
  const TheoryModel& m = sparse_model();
  TheoryState s = TheoryState::initial(m.w_opt);
  for (int k = 0; k < 300; ++k) {
    meansq_step(s, m, 0.01, 4e-5);
    ASSERT_EQ((s.W_tilde - s.W_tilde.transpose()).norm(), 0.0);
    ASSERT_NEAR(s.W_tilde.trace(), s.msd_history.back(), 1e-15 * s.msd_history.back());
    ASSERT_GE(s.msd_history.back(), 0.0);
  }
}

TEST(MeanSquareRecursion, EventuallyMonotoneToPositiveLimit) {
  const TheoryModel& m = sparse_model();
  ASSERT_LT(0.01, stability_upper_bound(m, false));
  const std::vector<double> msd = theory_msd_trajectory(m, 0.01, 0.0, 3000);
  for (std::size_t k = 100; k < msd.size(); ++k) EXPECT_LE(msd[k], msd[k - 1] * (1.0 + 1e-12));
  EXPECT_GT(msd.back(), 0.0);
}

TEST(MeanSquareRecursion, MatchesBruteForceEnsembleOnTinyProblem) {
  // M = 2, N = 1, white input, regressors drawn independently per iteration
  // as the model assumes. Low SNR with impulses keeps the error Gaussian
  // enough for the sign linearization.
  const std::size_t M = 2;
  const int K = 50, trials = 100000;
  const double mu = 0.05;
  const CgNoiseSpec noise{0.1, 1.0, 10.0};
  const std::vector<double> wo = {0.6, -0.3};
  const TheoryModel model =
      make_theory_model(white_stats(identity_bank(), M, {200, 2000}), identity_bank(), noise, wo, 0.05);

  std::vector<Eigen::Matrix2d> theory = {TheoryState::initial(model.w_opt).W_tilde};
  TheoryState st = TheoryState::initial(model.w_opt);
  for (int k = 0; k < K; ++k) {
    meansq_step(st, model, mu, 0.0);
    theory.push_back(st.W_tilde);
  }

  std::vector<Eigen::Matrix2d> mc(K + 1, Eigen::Matrix2d::Zero());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    double w[2] = {0.0, 0.0};
    for (int k = 0; k <= K; ++k) {
      const double a = wo[0] - w[0], b = wo[1] - w[1];
      mc[k](0, 0) += a * a;
      mc[k](0, 1) += a * b;
      mc[k](1, 1) += b * b;
      if (k == K) break;
      const double u0 = g(rng), u1 = g(rng);
      double v = std::sqrt(noise.sigma_g2) * g(rng);
      if (unit(rng) < noise.p_r) v += std::sqrt(noise.hbar * noise.sigma_g2) * g(rng);
      const double e = a * u0 + b * u1 + v;
      const double s = oracle::sign(e) / std::sqrt(u0 * u0 + u1 * u1);
      w[0] += mu * s * u0;
      w[1] += mu * s * u1;
    }
  }
  for (int k = 0; k <= K; ++k) {
    Eigen::Matrix2d e = mc[k] / trials;
    e(1, 0) = e(0, 1);
    const double scale = e.cwiseAbs().maxCoeff();
    EXPECT_LE((theory[k] - e).cwiseAbs().maxCoeff(), 0.05 * scale) << "k = " << k;
  }
}

TEST(SteadyState, AgreesWithClosedFormOnTinyProblem) {
  const CgNoiseSpec noise{0.001, 0.01, 1000.0};
  const std::vector<double> wo = {0.5, 0.5};
  const TheoryModel m = make_theory_model(white_stats(identity_bank(), 2), identity_bank(), noise, wo, 0.05);
  const double mu = 1e-3;
  const double fp = steady_state_msd(m, mu, 0.0).msd;
  const double cf = steady_state_msd_closed_form(m, mu);
  EXPECT_NEAR(cf, fp, 0.1 * fp);
  // Linear in mu once the frozen Omega dominates, so it vanishes with mu.
  EXPECT_NEAR(steady_state_msd_closed_form(m, 1e-7) / steady_state_msd_closed_form(m, 1e-6), 0.1,
              1e-3);
  EXPECT_GT(steady_state_msd(m, 2 * mu, 0.0).msd, fp);
}

TEST(SteadyState, ClosedFormIsGatedBySize) {
  const TheoryModel& m = sparse_model();
  EXPECT_THROW(steady_state_msd_closed_form(m, 0.01, 8), ModelError);
}

TEST(SteadyState, NonConvergenceIsReported) {
  SteadyStateOptions o;
  o.max_iter = 10;
  EXPECT_THROW(steady_state_msd(sparse_model(), 0.01, 0.0, o), ModelError);
}

TEST(SteadyState, PenaltyHelpsOnlyOnAnInterval) {
  const TheoryModel& m = sparse_model();
  SteadyStateOptions o;
  o.max_iter = 50000;
  // Large weights can keep the recursion chattering; fall back to the tail
  // average of the trajectory.
  auto level = [&](double rho) {
    try {
      return steady_state_msd(m, 0.01, rho, o).msd;
    } catch (const ModelError&) {
      const std::vector<double> t = theory_msd_trajectory(m, 0.01, rho, 20000);
      double acc = 0.0;
      for (std::size_t k = t.size() - 500; k < t.size(); ++k) acc += t[k];
      return acc / 500.0;
    }
  };
  const double base = level(0.0);
  EXPECT_LT(level(1e-4), base);
  EXPECT_GT(level(1e-3), base);
}

TEST(WhiteClosedForm, ArithmeticAndScaling) {
  const std::vector<double> p(4, 1.0), om(4, 0.8);
  const double a = msd_white_closed_form(0.002, 4, 32, p, om);
  EXPECT_NEAR(a, 0.002 * 4 * std::sqrt(32.0) / (2 * 4 * 0.8), 1e-15);
  EXPECT_NEAR(a, 0.007071, 1e-6);
  EXPECT_EQ(msd_white_closed_form(0.004, 4, 32, p, om), 2.0 * a);
  EXPECT_THROW(msd_white_closed_form(0.002, 4, 32, p, std::vector<double>(4, 0.0)), ParameterError);
}

TEST(StabilityBound, VariantsAndMonotonicity) {
  const std::vector<double> power = {4.0, 0.25, 0.1, 0.07};
  const std::vector<double> energy(4, 0.25);
  const CgNoiseSpec clean{0.0, 1e-3, 300000.0};
  EXPECT_EQ(stability_upper_bound(power, energy, clean, 32, false),
            stability_upper_bound(power, energy, clean, 32, true));
  double prev = stability_upper_bound(power, energy, clean, 32, false);
  for (double s2 : {1e-2, 1e-1, 1.0}) {
    const double b = stability_upper_bound(power, energy, {0.0, s2, 300000.0}, 32, false);
    EXPECT_LT(b, prev);
    prev = b;
  }
  prev = stability_upper_bound(power, energy, {0.0, 1e-2, 300000.0}, 32, true);
  for (double pr : {0.001, 0.01, 0.1, 0.5}) {
    const double b = stability_upper_bound(power, energy, {pr, 1e-2, 300000.0}, 32, true);
    EXPECT_LE(b, prev);
    prev = b;
  }
}

TEST(RhoUpperBound, ZeroSystemIsFeasible) {
  const std::vector<double> wo(8, 0.0);
  std::vector<GaussianMoments> phi;
  for (int m = 0; m < 8; ++m) phi.push_back({0.001 * (m - 4), 1e-4});
  const RhoUpperBound r = rho_upper_bound(phi, wo, 0.05);
  EXPECT_LT(r.cross_moment, 0.0);
  EXPECT_TRUE(r.feasible);
  EXPECT_GT(r.rho_up, 0.0);
}

TEST(RhoUpperBound, DenseLargeTapsAreInfeasible) {
  std::vector<double> wo;
  std::vector<GaussianMoments> phi;
  for (int m = 0; m < 16; ++m) {
    const double w = (m % 2 ? -1.0 : 1.0) * (0.5 + 0.1 * m);
    wo.push_back(w);
    phi.push_back({0.9 * w, 1e-8});  // shrunk toward zero as the penalty does
  }
  const RhoUpperBound r = rho_upper_bound(phi, wo, 0.05);
  EXPECT_GE(r.cross_moment, 0.0);
  EXPECT_FALSE(r.feasible);
}

TEST(RhoUpperBound, RejectsLengthMismatch) {
  const std::vector<double> wo(3, 0.0);
  const std::vector<GaussianMoments> phi(2);
  EXPECT_THROW(rho_upper_bound(phi, wo, 0.05), ParameterError);
}

TEST(Model, ValidationCatchesMismatch) {
  const auto s = white_stats(identity_bank(), 2, {2, 100});
  const std::vector<double> wrong(3, 0.1);
  EXPECT_THROW(make_theory_model(s, identity_bank(), {0.0, 1.0, 1.0}, wrong, 0.05), ParameterError);
}

}  // namespace
