// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Analytical mean and mean-square models for IWF-SSAF and S-IWF-SSAF under
// contaminated-Gaussian noise, their steady-state solutions, the step-size
// stability bound and the sparsity-weight upper limit rho_up.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssaf/filterbank.hpp"
#include "ssaf/signal.hpp"

namespace ssaf {

// Ensemble averages over subband regressors u_i(k):
//   A_i = u uT / ||u||,  A_check_i = u uT / ||u||^2,  R_i = u uT,
//   band_power_i = ||u||^2 / M.
struct EnsembleStats {
  std::size_t n_subbands = 0;
  std::size_t filter_length = 0;
  std::vector<Eigen::MatrixXd> A_mean;
  std::vector<Eigen::MatrixXd> A_check_mean;
  std::vector<Eigen::MatrixXd> R;
  std::vector<double> band_power;
};

struct EnsembleOptions {
  std::size_t trials = 200;
  std::size_t frames_per_trial = 2000;
};

// Frames are counted once the analysis and regressor delay lines are full.
EnsembleStats estimate_ensemble_stats(const InputSpec& input, const FilterBank& bank,
                                      std::size_t filter_length, std::uint64_t seed,
                                      const EnsembleOptions& options = {});

// Everything the recursions need besides mu and rho.
struct TheoryModel {
  std::shared_ptr<const EnsembleStats> stats;
  std::vector<double> band_energy;  // ||h_i||^2
  CgNoiseSpec noise;
  Eigen::VectorXd w_opt;
  double xi = 0.05;

  std::size_t filter_length() const { return static_cast<std::size_t>(w_opt.size()); }
  void validate() const;
};

TheoryModel make_theory_model(std::shared_ptr<const EnsembleStats> stats, const FilterBank& bank,
                              const CgNoiseSpec& noise, std::span<const double> w_opt, double xi);

// sqrt(2/pi) [p_r / sqrt(t + e (hbar + 1) s) + (1 - p_r) / sqrt(t + e s)] with
// t = Tr{W R_i}, e = ||h_i||^2, s = sigma_g2.
double omega_i(double trace_w_r, double band_energy, const CgNoiseSpec& noise);
double omega_i(const Eigen::MatrixXd& W_tilde, const TheoryModel& model, std::size_t band);

// Small-step limit where Tr{W R_i} is negligible.
std::vector<double> omega_infinity(std::span<const double> band_energy, const CgNoiseSpec& noise);

struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;
};

struct GaussianMomentValues {
  double abs_mean = 0.0;     // E|phi|
  double sgn_mean = 0.0;     // E{sgn phi}
  double h_mean = 0.0;       // E{H'(phi)}
  double h_phi_mean = 0.0;   // E{H'(phi) phi}
  double h_sq_mean = 0.0;    // E{H'(phi)^2}
};

// Closed forms for E|phi| and E{sgn phi}; the three penalty moments use the
// small-xi approximations E{sgn}/(xi + E|phi|), E|phi|/(xi + E|phi|) and
// 1/(xi^2 + 2 xi E|phi| + E{phi^2}). Zero variance is the deterministic limit.
GaussianMomentValues gaussian_moment_eval(const GaussianMoments& gm, double xi);

struct TheoryState {
  Eigen::MatrixXd W_tilde;
  Eigen::MatrixXd Phi_tilde;
  Eigen::VectorXd mean_w_tilde;
  Eigen::VectorXd mean_phi_tilde;
  std::vector<double> msd_history;
  std::size_t k = 0;
  std::size_t clamped_variances = 0;  // negative sigma_m^2 clamped to zero

  // w(0) = 0: E{w~(0)} = w_opt, W~(0) = w_opt w_optT.
  static TheoryState initial(const Eigen::VectorXd& w_opt);
};

// Advances only the mean vectors: E{phi~(k+1)} = (I - mu B) E{w~(k)} with
// B = sum_i Omega_i(k) E{A_i}, then E{w~(k+1)} = E{phi~(k+1)} + rho E{H'}.
void mean_step(TheoryState& state, const TheoryModel& model, double mu, double rho);

// Joint step of the mean and mean-square recursions; appends Tr{W~(k+1)}.
// Throws DivergenceError on non-finite entries.
void meansq_step(TheoryState& state, const TheoryModel& model, double mu, double rho);

// MSD(0), MSD(1), ..., MSD(iterations).
std::vector<double> theory_msd_trajectory(const TheoryModel& model, double mu, double rho,
                                          std::size_t iterations);

struct SteadyStateOptions {
  double tolerance = 1e-6;
  std::size_t consecutive = 100;
  std::size_t max_iter = 2'000'000;
};

struct SteadyStateResult {
  double msd = 0.0;
  std::size_t iterations = 0;
  TheoryState state;
};

// Iterates meansq_step until the relative MSD change stays below tolerance for
// `consecutive` steps. Throws ModelError when max_iter is reached.
SteadyStateResult steady_state_msd(const TheoryModel& model, double mu, double rho,
                                   const SteadyStateOptions& options = {});

// mu^2 vecT(I) (I - F)^-1 vec(sum_i E{A_check_i}) with F built from the frozen
// Omega_i(inf). Builds an M^2 x M^2 system, so M is limited to max_length.
double steady_state_msd_closed_form(const TheoryModel& model, double mu,
                                    std::size_t max_length = 64);

// mu N sqrt(M) / (2 sum_i Omega_i sigma_u,i); band_powers are sigma_u,i^2.
double msd_white_closed_form(double mu, std::size_t n_subbands, std::size_t filter_length,
                             std::span<const double> band_powers,
                             std::span<const double> omega_inf);

// (2/N) sum_i Omega_i,min sigma_u,i / sqrt(M) with
// Omega_i,min = sqrt(2/pi) c / sqrt(sigma_u,i^2 + ||h_i||^2 sigma_g2), where
// c = 1 - p_r when use_impulse_term is set and c = 1 otherwise.
double stability_upper_bound(std::span<const double> band_powers,
                             std::span<const double> band_energy, const CgNoiseSpec& noise,
                             std::size_t filter_length, bool use_impulse_term);
double stability_upper_bound(const TheoryModel& model, bool use_impulse_term);

// Per-component distribution of phi(k): mean w_opt,m - z_m, variance
// Phi~_mm - z_m^2 (clamped at zero).
std::vector<GaussianMoments> phi_moments(const TheoryState& state, const Eigen::VectorXd& w_opt);

struct RhoUpperBound {
  double rho_up = 0.0;
  double cross_moment = 0.0;      // E{phi~T H'(phi)}
  double subgradient_power = 0.0; // E{||H'(phi)||^2}
  bool feasible = false;          // cross_moment < 0
};

RhoUpperBound rho_upper_bound(std::span<const GaussianMoments> phi_stats,
                              std::span<const double> w_opt, double xi);

}  // namespace ssaf
