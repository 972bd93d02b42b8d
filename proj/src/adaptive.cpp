// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "ssaf/errors.hpp"

namespace ssaf {
namespace {

constexpr double kVssRegularizer = 1e-5;

void check_finite(std::span<const double> w, std::size_t k, const char* who) {
  for (double x : w) {
    if (!std::isfinite(x)) throw DivergenceError(std::string(who) + " produced a non-finite weight", k);
  }
}

double band_energy(const SubbandFrame& frame, std::size_t i) {
  const std::vector<double>& u = frame.regressors[i];
  double e = 0.0;
  for (double x : u) e += x * x;
  return e;
}

// phi = w + sum_i step_i sgn(e_i) u_i / sqrt(||u_i||^2 + delta).
void sign_adaptation(FilterState& s, const SubbandFrame& frame, std::span<const double> e,
                     std::span<const double> steps, double delta) {
  const std::size_t M = s.w.size();
  s.phi = s.w;
  for (std::size_t i = 0; i < frame.n_subbands(); ++i) {
    const double denom = std::sqrt(band_energy(frame, i) + delta);
    if (denom == 0.0 || e[i] == 0.0) continue;
    const double g = steps[i] * sgn(e[i]) / denom;
    const double* u = frame.regressors[i].data();
    for (std::size_t m = 0; m < M; ++m) s.phi[m] += g * u[m];
  }
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kNsaf: return "nsaf";
    case AlgorithmKind::kIwfSsaf: return "iwf_ssaf";
    case AlgorithmKind::kSIwfSsaf: return "s_iwf_ssaf";
    case AlgorithmKind::kSIwfSsafAdaptiveRho: return "s_iwf_ssaf_adaptive_rho";
    case AlgorithmKind::kVpSIwfSsaf: return "vp_s_iwf_ssaf";
  }
  return "unknown";
}

AlgorithmKind algorithm_kind_from_string(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  for (auto k : {AlgorithmKind::kNsaf, AlgorithmKind::kIwfSsaf, AlgorithmKind::kSIwfSsaf,
                 AlgorithmKind::kSIwfSsafAdaptiveRho, AlgorithmKind::kVpSIwfSsaf}) {
    if (s == to_string(k)) return k;
  }
  throw ParameterError("unknown algorithm kind: " + std::string(name));
}

double AlgorithmConfig::beta(std::size_t n_subbands, std::size_t filter_length) const {
  return 1.0 - static_cast<double>(n_subbands) / (tau * static_cast<double>(filter_length));
}

void AlgorithmConfig::validate(std::size_t n_subbands, std::size_t filter_length) const {
  if (!(xi > 0.0)) throw ParameterError("xi must be > 0");
  if (!(delta >= 0.0)) throw ParameterError("delta must be >= 0");
  switch (kind) {
    case AlgorithmKind::kNsaf:
    case AlgorithmKind::kIwfSsaf:
      if (!(mu > 0.0)) throw ParameterError("mu must be > 0");
      break;
    case AlgorithmKind::kSIwfSsaf:
      if (!(mu > 0.0)) throw ParameterError("mu must be > 0");
      if (!(rho >= 0.0)) throw ParameterError("rho must be >= 0");
      break;
    case AlgorithmKind::kSIwfSsafAdaptiveRho:
      if (!(mu > 0.0)) throw ParameterError("mu must be > 0");
      if (!(chi >= 1.0 && chi <= 2.0)) throw ParameterError("chi must lie in [1, 2]");
      break;
    case AlgorithmKind::kVpSIwfSsaf: {
      if (!(chi >= 1.0 && chi <= 2.0)) throw ParameterError("chi must lie in [1, 2]");
      if (!(tau >= 1.0)) throw ParameterError("tau must be >= 1");
      if (!(mu_min > 0.0 && mu_max > mu_min)) throw ParameterError("need 0 < mu_min < mu_max");
      const double b = beta(n_subbands, filter_length);
      if (!(b > 0.0 && b < 1.0)) throw ParameterError("beta = 1 - N/(tau M) must lie in (0, 1)");
      break;
    }
  }
}

std::string AlgorithmConfig::display_name() const {
  return label.empty() ? std::string(to_string(kind)) : label;
}

FilterState FilterState::initial(std::size_t filter_length, std::size_t n_subbands,
                                 double mu_max) {
  FilterState s;
  s.w.assign(filter_length, 0.0);
  s.phi.assign(filter_length, 0.0);
  s.w_hat.assign(filter_length, 0.0);
  s.mu_o.assign(n_subbands, mu_max);
  return s;
}

void iwf_ssaf_update(FilterState& state, const SubbandFrame& frame, double mu, double delta) {
  if (!(mu > 0.0)) throw ParameterError("mu must be > 0");
  const std::vector<double> e = subband_error(frame, state.w);
  const std::vector<double> steps(frame.n_subbands(), mu);
  sign_adaptation(state, frame, e, steps, delta);
  check_finite(state.phi, state.k, "IWF-SSAF");
  state.w = state.phi;
}

void sparsity_step(FilterState& state, const LogPenalty& penalty, double rho) {
  if (!(rho >= 0.0)) throw ParameterError("rho must be >= 0");
  const std::size_t M = state.phi.size();
  state.w.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    state.w[m] = state.phi[m] - rho * penalty.subgradient(state.phi[m]);
  }
}

const std::vector<double>& vss_step(std::span<const double> errors,
                                    std::span<const double> norms, FilterState& state,
                                    const AlgorithmConfig& cfg, double beta) {
  const std::size_t N = state.mu_o.size();
  if (errors.size() != N || norms.size() != N) throw ParameterError("vss_step: band count mismatch");
  for (std::size_t i = 0; i < N; ++i) {
    double raw = std::abs(errors[i]) / (norms[i] + kVssRegularizer);
    // Two-sided clamp; the lower branch applies below mu_min.
    raw = std::clamp(raw, cfg.mu_min, cfg.mu_max);
    const double prev = state.mu_o[i];
    // Same as beta prev + (1 - beta) min(raw, prev), written so rounding can
    // never push the result above prev.
    double next = prev - (1.0 - beta) * std::max(prev - raw, 0.0);
    next = std::max(next, cfg.mu_min);
    if (next > prev) {
      ++state.step_size_increases;
      next = prev;
    }
    state.mu_o[i] = next;
  }
  return state.mu_o;
}

double rho_adapt(std::span<const double> phi, const FilterState& state, const LogPenalty& penalty,
                 double chi) {
  if (state.k == 0) return 0.0;
  double grad2 = 0.0;
  for (double x : phi) {
    const double g = penalty.subgradient(x);
    grad2 += g * g;
  }
  if (grad2 == 0.0) return 0.0;
  const double gap = penalty.value(phi) - state.h_w_hat;
  return chi * std::max(gap, 0.0) / grad2;
}

void update_sparsity_reference(FilterState& state, const LogPenalty& penalty) {
  if (state.k == 0) {
    state.w_hat = state.phi;
  } else {
    for (std::size_t m = 0; m < state.w_hat.size(); ++m) {
      state.w_hat[m] = 0.5 * state.w_hat[m] + 0.5 * state.phi[m];
    }
  }
  state.h_w_hat = penalty.value(state.w_hat);
}

void vp_s_iwf_ssaf_iterate(FilterState& state, const SubbandFrame& frame,
                           const AlgorithmConfig& cfg, const LogPenalty& penalty) {
  const std::size_t N = frame.n_subbands();
  const std::size_t M = state.w.size();
  const std::vector<double> e = subband_error(frame, state.w);
  const std::vector<double>& steps =
      vss_step(e, frame.regressor_norms, state, cfg, cfg.beta(N, M));
  sign_adaptation(state, frame, e, steps, cfg.delta);
  check_finite(state.phi, state.k, "VP-S-IWF-SSAF");
  state.rho_o = rho_adapt(state.phi, state, penalty, cfg.chi);
  sparsity_step(state, penalty, state.rho_o);
  update_sparsity_reference(state, penalty);
  check_finite(state.w, state.k, "VP-S-IWF-SSAF");
}

void nsaf_update(FilterState& state, const SubbandFrame& frame, double mu, double delta) {
  if (!(mu > 0.0)) throw ParameterError("mu must be > 0");
  const std::vector<double> e = subband_error(frame, state.w);
  const std::size_t M = state.w.size();
  state.phi = state.w;
  for (std::size_t i = 0; i < frame.n_subbands(); ++i) {
    const double denom = band_energy(frame, i) + delta;
    if (denom == 0.0) continue;
    const double g = mu * e[i] / denom;
    const double* u = frame.regressors[i].data();
    for (std::size_t m = 0; m < M; ++m) state.phi[m] += g * u[m];
  }
  check_finite(state.phi, state.k, "NSAF");
  state.w = state.phi;
}

double mu_max_default(double sigma_d2, double sigma_u2, std::size_t filter_length) {
  if (!(sigma_d2 > 0.0 && sigma_u2 > 0.0) || filter_length == 0) {
    throw ParameterError("mu_max_default needs positive powers and M > 0");
  }
  return std::sqrt(sigma_d2 / (static_cast<double>(filter_length) * sigma_u2));
}

AdaptiveFilter::AdaptiveFilter(AlgorithmConfig cfg, std::size_t n_subbands,
                               std::size_t filter_length)
    : cfg_(std::move(cfg)),
      n_subbands_(n_subbands),
      penalty_(cfg_.xi),
      beta_(cfg_.beta(n_subbands, filter_length)) {
  if (n_subbands == 0 || filter_length == 0) throw ParameterError("N and M must be > 0");
  cfg_.validate(n_subbands, filter_length);
  state_ = FilterState::initial(filter_length, n_subbands, cfg_.mu_max);
}

void AdaptiveFilter::set_weights(std::span<const double> w) {
  if (w.size() != state_.w.size()) throw ParameterError("set_weights: length mismatch");
  state_.w.assign(w.begin(), w.end());
}

void AdaptiveFilter::adapt(const SubbandFrame& frame) {
  if (frame.n_subbands() != n_subbands_) throw ParameterError("frame band count != filter N");
  switch (cfg_.kind) {
    case AlgorithmKind::kNsaf:
      nsaf_update(state_, frame, cfg_.mu, cfg_.delta);
      break;
    case AlgorithmKind::kIwfSsaf:
      iwf_ssaf_update(state_, frame, cfg_.mu, cfg_.delta);
      break;
    case AlgorithmKind::kSIwfSsaf:
      iwf_ssaf_update(state_, frame, cfg_.mu, cfg_.delta);
      sparsity_step(state_, penalty_, cfg_.rho);
      check_finite(state_.w, state_.k, "S-IWF-SSAF");
      break;
    case AlgorithmKind::kSIwfSsafAdaptiveRho:
      iwf_ssaf_update(state_, frame, cfg_.mu, cfg_.delta);
      state_.rho_o = rho_adapt(state_.phi, state_, penalty_, cfg_.chi);
      sparsity_step(state_, penalty_, state_.rho_o);
      update_sparsity_reference(state_, penalty_);
      check_finite(state_.w, state_.k, "S-IWF-SSAF");
      break;
    case AlgorithmKind::kVpSIwfSsaf:
      vp_s_iwf_ssaf_iterate(state_, frame, cfg_, penalty_);
      break;
  }
  ++state_.k;
}

DelaylessResult run_delayless(AdaptiveFilter& filter, const FilterBank& bank,
                              std::span<const double> u, std::span<const double> d,
                              const DelaylessOptions& options) {
  if (u.size() != d.size()) throw ParameterError("u and d must have equal length");
  const std::size_t M = filter.filter_length();
  Partitioner part(bank, M);
  DelaylessResult out;
  out.error.resize(u.size());

  std::vector<double> w_full(M, 0.0);
  std::vector<double> line(2 * M, 0.0);  // mirrored fullband regressor
  std::size_t pos = 0;
  std::size_t copies = 0;

  for (std::size_t n = 0; n < u.size(); ++n) {
    pos = pos == 0 ? M - 1 : pos - 1;
    line[pos] = line[pos + M] = u[n];
    const bool frame_ready = part.push(u[n], d[n]);
    if (frame_ready) {
      w_full = filter.weights();
      if (options.snapshot_interval > 0 && copies % options.snapshot_interval == 0) {
        out.history.push_back({n, w_full});
      }
      ++copies;
    }
    const double* x = line.data() + pos;
    double y = 0.0;
    for (std::size_t m = 0; m < M; ++m) y += x[m] * w_full[m];
    out.error[n] = d[n] - y;

    if (frame_ready) {
      if (options.record_subband_errors) {
        out.subband_errors.push_back(subband_error(part.frame(), filter.weights()));
      }
      filter.adapt(part.frame());
    }
  }
  return out;
}

}  // namespace ssaf
