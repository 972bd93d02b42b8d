// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Sign subband adaptive filters on the multiband structure:
//   IWF-SSAF          phi = w + mu sum_i sgn(e_i) u_i / sqrt(||u_i||^2 + delta)
//   S-IWF-SSAF        w   = phi - rho H'(phi)
//   VP-S-IWF-SSAF     band step sizes mu_o,i(k) and rho_o(k) adapted jointly
//   NSAF              w  += mu sum_i e_i u_i / (||u_i||^2 + delta)   (baseline)

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssaf/filterbank.hpp"
#include "ssaf/penalty.hpp"

namespace ssaf {

enum class AlgorithmKind {
  kNsaf,
  kIwfSsaf,
  kSIwfSsaf,
  kSIwfSsafAdaptiveRho,
  kVpSIwfSsaf,
};

std::string_view to_string(AlgorithmKind kind);
// Accepts the snake_case names and their dashed spellings ("iwf-ssaf").
AlgorithmKind algorithm_kind_from_string(std::string_view name);

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::kIwfSsaf;
  std::string label;
  double mu = 0.01;
  double rho = 0.0;
  double chi = 1.0;
  double xi = 0.05;
  double tau = 1.0;
  double mu_min = 1e-5;
  double mu_max = 0.0;  // <= 0 means "derive from signal powers" (harness)
  double delta = 0.0;

  // Exponential window factor 1 - N / (tau M).
  double beta(std::size_t n_subbands, std::size_t filter_length) const;
  void validate(std::size_t n_subbands, std::size_t filter_length) const;
  std::string display_name() const;
};

struct FilterState {
  std::vector<double> w;
  std::vector<double> phi;
  std::vector<double> w_hat;
  std::vector<double> mu_o;
  std::size_t k = 0;
  double h_w_hat = 0.0;  // H(w_hat) carried to the next iteration
  double rho_o = 0.0;    // most recent rho_o(k)
  std::size_t step_size_increases = 0;

  // w = 0, mu_o,i(0) = mu_max.
  static FilterState initial(std::size_t filter_length, std::size_t n_subbands, double mu_max);
};

// The step functions below leave state.k untouched; AdaptiveFilter::adapt
// advances it once per decimated iteration.

// phi = w + mu sum_i sgn(e_i) u_i / sqrt(||u_i||^2 + delta); w = phi.
void iwf_ssaf_update(FilterState& state, const SubbandFrame& frame, double mu, double delta);

// w = phi - rho H'(phi).
void sparsity_step(FilterState& state, const LogPenalty& penalty, double rho);

// Raw mu_i = |e_i| / (||u_i|| + 1e-5), clamped to [mu_min, mu_max], then
// mu_o,i(k) = beta mu_o,i(k-1) + (1 - beta) min(mu_i, mu_o,i(k-1)).
const std::vector<double>& vss_step(std::span<const double> errors,
                                    std::span<const double> norms, FilterState& state,
                                    const AlgorithmConfig& cfg, double beta);

// rho_o = chi max(H(phi) - H(w_hat), 0) / ||H'(phi)||^2, or 0 at k = 0 and
// when H'(phi) vanishes.
double rho_adapt(std::span<const double> phi, const FilterState& state, const LogPenalty& penalty,
                 double chi);

// w_hat = phi at k = 0, else 0.5 w_hat + 0.5 phi; refreshes H(w_hat).
void update_sparsity_reference(FilterState& state, const LogPenalty& penalty);

void vp_s_iwf_ssaf_iterate(FilterState& state, const SubbandFrame& frame,
                           const AlgorithmConfig& cfg, const LogPenalty& penalty);

void nsaf_update(FilterState& state, const SubbandFrame& frame, double mu, double delta);

// sqrt(sigma_d2 / (M sigma_u2)).
double mu_max_default(double sigma_d2, double sigma_u2, std::size_t filter_length);

class AdaptiveFilter {
 public:
  AdaptiveFilter(AlgorithmConfig cfg, std::size_t n_subbands, std::size_t filter_length);

  // One decimated iteration. Throws DivergenceError on non-finite weights.
  void adapt(const SubbandFrame& frame);

  const std::vector<double>& weights() const { return state_.w; }
  void set_weights(std::span<const double> w);
  const FilterState& state() const { return state_; }
  const AlgorithmConfig& config() const { return cfg_; }
  std::size_t filter_length() const { return state_.w.size(); }
  std::size_t n_subbands() const { return n_subbands_; }

 private:
  AlgorithmConfig cfg_;
  std::size_t n_subbands_;
  LogPenalty penalty_;
  double beta_;
  FilterState state_;
};

struct WeightSnapshot {
  std::size_t n = 0;
  std::vector<double> w;
};

struct DelaylessOptions {
  std::size_t snapshot_interval = 0;  // record w every this many copies; 0 disables
  bool record_subband_errors = false;
};

struct DelaylessResult {
  std::vector<double> error;  // fullband e(n) = d(n) - u(n)^T w(n)
  std::vector<WeightSnapshot> history;
  std::vector<std::vector<double>> subband_errors;  // e_{i,D}(k) per k, if recorded
};

// Runs the adaptation in the decimated domain and computes the fullband error
// with a copy of w(k) refreshed at every n = kN.
DelaylessResult run_delayless(AdaptiveFilter& filter, const FilterBank& bank,
                              std::span<const double> u, std::span<const double> d,
                              const DelaylessOptions& options = {});

}  // namespace ssaf
