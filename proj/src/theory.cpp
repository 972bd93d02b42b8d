// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssaf/errors.hpp"
#include "ssaf/penalty.hpp"
#include "ssaf/random.hpp"

namespace ssaf {
namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
constexpr std::size_t kBatch = 256;

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// B = sum_i Omega_i(k) E{A_i}, Omega evaluated at W.
Eigen::MatrixXd weighted_a_sum(const Eigen::MatrixXd& W, const TheoryModel& model) {
  const EnsembleStats& st = *model.stats;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(W.rows(), W.cols());
  for (std::size_t i = 0; i < st.n_subbands; ++i) B += omega_i(W, model, i) * st.A_mean[i];
  return B;
}

Eigen::MatrixXd a_check_sum(const EnsembleStats& st) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(st.filter_length),
                                            static_cast<Eigen::Index>(st.filter_length));
  for (const auto& a : st.A_check_mean) S += a;
  return S;
}

// z = (I - mu B) E{w~}, Phi~ = W~ + mu^2 sum E{A_check} - mu (W~ B + B W~).
void intermediate_step(TheoryState& s, const TheoryModel& model, double mu) {
  const Eigen::MatrixXd B = weighted_a_sum(s.W_tilde, model);
  s.mean_phi_tilde = s.mean_w_tilde - mu * (B * s.mean_w_tilde);
  Eigen::MatrixXd WB = s.W_tilde * B;
  s.Phi_tilde = s.W_tilde + (mu * mu) * a_check_sum(*model.stats) - mu * (WB + WB.transpose());
  symmetrize(s.Phi_tilde);
}

struct PenaltyMoments {
  Eigen::VectorXd h;      // E{H'(phi_m)}
  Eigen::VectorXd h_phi;  // E{H'(phi_m) phi_m}
  Eigen::VectorXd h_sq;   // E{H'(phi_m)^2}
};

PenaltyMoments penalty_moments(TheoryState& s, const TheoryModel& model) {
  const Eigen::Index M = s.mean_phi_tilde.size();
  PenaltyMoments pm{Eigen::VectorXd(M), Eigen::VectorXd(M), Eigen::VectorXd(M)};
  for (Eigen::Index m = 0; m < M; ++m) {
    const double z = s.mean_phi_tilde[m];
    double var = s.Phi_tilde(m, m) - z * z;
    if (var < 0.0) {
      ++s.clamped_variances;
      var = 0.0;
    }
    const GaussianMomentValues v = gaussian_moment_eval({model.w_opt[m] - z, var}, model.xi);
    pm.h[m] = v.h_mean;
    pm.h_phi[m] = v.h_phi_mean;
    pm.h_sq[m] = v.h_sq_mean;
  }
  return pm;
}

}  // namespace

EnsembleStats estimate_ensemble_stats(const InputSpec& input, const FilterBank& bank,
                                      std::size_t filter_length, std::uint64_t seed,
                                      const EnsembleOptions& options) {
  input.validate();
  if (filter_length == 0) throw ParameterError("M must be > 0");
  if (options.trials == 0 || options.frames_per_trial == 0) {
    throw ParameterError("ensemble needs at least one trial and one frame");
  }
  const std::size_t N = bank.n_subbands;
  const auto M = static_cast<Eigen::Index>(filter_length);
  const std::size_t warm = (bank.filter_length + filter_length + N - 1) / N;
  const std::size_t samples = (warm + options.frames_per_trial) * N;

  std::vector<Eigen::MatrixXd> sum_a(N, Eigen::MatrixXd::Zero(M, M));
  std::vector<Eigen::MatrixXd> sum_ac(N, Eigen::MatrixXd::Zero(M, M));
  std::vector<Eigen::MatrixXd> sum_r(N, Eigen::MatrixXd::Zero(M, M));
  std::vector<double> sum_power(N, 0.0);
  std::vector<std::size_t> count(N, 0);

  std::vector<Eigen::MatrixXd> ua(N, Eigen::MatrixXd(M, kBatch));
  std::vector<Eigen::MatrixXd> uc(N, Eigen::MatrixXd(M, kBatch));
  std::vector<Eigen::MatrixXd> ur(N, Eigen::MatrixXd(M, kBatch));
  std::vector<Eigen::Index> fill(N, 0);

  auto flush = [&](std::size_t i) {
    const Eigen::Index c = fill[i];
    if (c == 0) return;
    sum_a[i].selfadjointView<Eigen::Lower>().rankUpdate(ua[i].leftCols(c));
    sum_ac[i].selfadjointView<Eigen::Lower>().rankUpdate(uc[i].leftCols(c));
    sum_r[i].selfadjointView<Eigen::Lower>().rankUpdate(ur[i].leftCols(c));
    fill[i] = 0;
  };

  const std::vector<double> zeros(samples, 0.0);
  for (std::size_t t = 0; t < options.trials; ++t) {
    const std::vector<double> u =
        generate_input(input, samples, derive_seed(seed, t, StreamRole::kEnsemble));
    Partitioner part(bank, filter_length);
    for (std::size_t n = 0; n < samples; ++n) {
      if (!part.push(u[n], 0.0)) continue;
      const SubbandFrame& f = part.frame();
      if (f.k < warm) continue;
      for (std::size_t i = 0; i < N; ++i) {
        const double norm = f.regressor_norms[i];
        if (!(norm > 0.0)) continue;
        const Eigen::Map<const Eigen::VectorXd> reg(f.regressors[i].data(), M);
        const Eigen::Index c = fill[i]++;
        ur[i].col(c) = reg;
        ua[i].col(c) = reg / std::sqrt(norm);
        uc[i].col(c) = reg / norm;
        sum_power[i] += norm * norm / static_cast<double>(M);
        ++count[i];
        if (fill[i] == static_cast<Eigen::Index>(kBatch)) flush(i);
      }
    }
  }

  EnsembleStats st;
  st.n_subbands = N;
  st.filter_length = filter_length;
  for (std::size_t i = 0; i < N; ++i) {
    flush(i);
    if (count[i] == 0) throw ParameterError("degenerate input: subband regressors are all zero");
    const double inv = 1.0 / static_cast<double>(count[i]);
    auto full = [inv](const Eigen::MatrixXd& lower) {
      Eigen::MatrixXd m = lower.selfadjointView<Eigen::Lower>();
      return Eigen::MatrixXd(m * inv);
    };
    st.A_mean.push_back(full(sum_a[i]));
    st.A_check_mean.push_back(full(sum_ac[i]));
    st.R.push_back(full(sum_r[i]));
    st.band_power.push_back(sum_power[i] * inv);
  }
  return st;
}

void TheoryModel::validate() const {
  if (!stats) throw ParameterError("theory model has no ensemble statistics");
  if (stats->filter_length != filter_length()) throw ParameterError("w_opt length != stats M");
  if (band_energy.size() != stats->n_subbands) throw ParameterError("band energy count != N");
  if (!(xi > 0.0)) throw ParameterError("xi must be > 0");
  noise.validate();
}

TheoryModel make_theory_model(std::shared_ptr<const EnsembleStats> stats, const FilterBank& bank,
                              const CgNoiseSpec& noise, std::span<const double> w_opt, double xi) {
  TheoryModel m;
  m.stats = std::move(stats);
  m.band_energy = bank.per_band_energy;
  m.noise = noise;
  m.w_opt = Eigen::Map<const Eigen::VectorXd>(w_opt.data(), static_cast<Eigen::Index>(w_opt.size()));
  m.xi = xi;
  m.validate();
  return m;
}

double omega_i(double trace_w_r, double band_energy, const CgNoiseSpec& noise) {
  const double floor = band_energy * noise.sigma_g2;
  const double impulsive = trace_w_r + floor * (noise.hbar + 1.0);
  const double background = trace_w_r + floor;
  double acc = 0.0;
  if (noise.p_r > 0.0) {
    if (!(impulsive > 0.0)) throw ParameterError("omega: nonpositive impulsive error power");
    acc += noise.p_r / std::sqrt(impulsive);
  }
  if (noise.p_r < 1.0) {
    if (!(background > 0.0)) throw ParameterError("omega: nonpositive background error power");
    acc += (1.0 - noise.p_r) / std::sqrt(background);
  }
  return kSqrt2OverPi * acc;
}

double omega_i(const Eigen::MatrixXd& W_tilde, const TheoryModel& model, std::size_t band) {
  const double tr = W_tilde.cwiseProduct(model.stats->R[band]).sum();
  return omega_i(std::max(tr, 0.0), model.band_energy[band], model.noise);
}

std::vector<double> omega_infinity(std::span<const double> band_energy, const CgNoiseSpec& noise) {
  std::vector<double> out;
  out.reserve(band_energy.size());
  for (double e : band_energy) out.push_back(omega_i(0.0, e, noise));
  return out;
}

GaussianMomentValues gaussian_moment_eval(const GaussianMoments& gm, double xi) {
  if (!(gm.variance >= 0.0)) throw ParameterError("Gaussian variance must be >= 0");
  if (!(xi > 0.0)) throw ParameterError("xi must be > 0");
  GaussianMomentValues v;
  const double mean = gm.mean;
  if (gm.variance == 0.0) {
    v.abs_mean = std::abs(mean);
    v.sgn_mean = sgn(mean);
  } else {
    const double s = std::sqrt(gm.variance);
    const double a = mean / (std::numbers::sqrt2 * s);
    v.sgn_mean = std::erf(a);
    v.abs_mean = kSqrt2OverPi * s * std::exp(-a * a) + mean * v.sgn_mean;
  }
  v.h_mean = v.sgn_mean / (xi + v.abs_mean);
  v.h_phi_mean = v.abs_mean / (xi + v.abs_mean);
  v.h_sq_mean = 1.0 / (xi * xi + 2.0 * xi * v.abs_mean + mean * mean + gm.variance);
  return v;
}

TheoryState TheoryState::initial(const Eigen::VectorXd& w_opt) {
  TheoryState s;
  s.W_tilde = w_opt * w_opt.transpose();
  s.Phi_tilde = s.W_tilde;
  s.mean_w_tilde = w_opt;
  s.mean_phi_tilde = w_opt;
  s.msd_history.push_back(w_opt.squaredNorm());
  return s;
}

void mean_step(TheoryState& state, const TheoryModel& model, double mu, double rho) {
  intermediate_step(state, model, mu);
  state.mean_w_tilde = state.mean_phi_tilde;
  if (rho != 0.0) state.mean_w_tilde += rho * penalty_moments(state, model).h;
}

void meansq_step(TheoryState& state, const TheoryModel& model, double mu, double rho) {
  intermediate_step(state, model, mu);
  if (rho == 0.0) {
    state.W_tilde = state.Phi_tilde;
    state.mean_w_tilde = state.mean_phi_tilde;
  } else {
    const PenaltyMoments pm = penalty_moments(state, model);
    // Theta_ml = E{H'_m} z_l off the diagonal, E{H'_m} w_opt,m - E{H'_m phi_m} on it.
    Eigen::MatrixXd theta = pm.h * state.mean_phi_tilde.transpose();
    Eigen::MatrixXd xi_mat = pm.h * pm.h.transpose();
    for (Eigen::Index m = 0; m < theta.rows(); ++m) {
      theta(m, m) = pm.h[m] * model.w_opt[m] - pm.h_phi[m];
      xi_mat(m, m) = pm.h_sq[m];
    }
    state.W_tilde = state.Phi_tilde + rho * (theta + theta.transpose()) + (rho * rho) * xi_mat;
    symmetrize(state.W_tilde);
    state.mean_w_tilde = state.mean_phi_tilde + rho * pm.h;
  }
  ++state.k;
  if (!all_finite(state.W_tilde)) {
    throw DivergenceError("mean-square recursion produced a non-finite entry", state.k);
  }
  state.msd_history.push_back(state.W_tilde.trace());
}

std::vector<double> theory_msd_trajectory(const TheoryModel& model, double mu, double rho,
                                          std::size_t iterations) {
  model.validate();
  TheoryState s = TheoryState::initial(model.w_opt);
  s.msd_history.reserve(iterations + 1);
  for (std::size_t k = 0; k < iterations; ++k) meansq_step(s, model, mu, rho);
  return s.msd_history;
}

SteadyStateResult steady_state_msd(const TheoryModel& model, double mu, double rho,
                                   const SteadyStateOptions& options) {
  model.validate();
  SteadyStateResult r;
  r.state = TheoryState::initial(model.w_opt);
  std::size_t streak = 0;
  double prev = r.state.msd_history.back();
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    meansq_step(r.state, model, mu, rho);
    // Only the latest value is needed.
    const double cur = r.state.msd_history.back();
    r.state.msd_history.clear();
    r.state.msd_history.push_back(cur);
    streak = std::abs(cur - prev) < options.tolerance * prev ? streak + 1 : 0;
    prev = cur;
    if (streak >= options.consecutive) {
      r.msd = cur;
      r.iterations = it;
      return r;
    }
  }
  throw ModelError("steady-state recursion did not settle within max_iter iterations");
}

double steady_state_msd_closed_form(const TheoryModel& model, double mu, std::size_t max_length) {
  model.validate();
  const std::size_t Mz = model.filter_length();
  if (Mz > max_length) {
    throw ModelError("closed form needs an M^2 x M^2 solve; use steady_state_msd for M = " +
                     std::to_string(Mz));
  }
  const EnsembleStats& st = *model.stats;
  const auto M = static_cast<Eigen::Index>(Mz);
  const std::vector<double> om = omega_infinity(model.band_energy, model.noise);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(M, M);
  for (std::size_t i = 0; i < st.n_subbands; ++i) B += om[i] * st.A_mean[i];

  // I - F = mu (B (x) I + I (x) B).
  const Eigen::Index M2 = M * M;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(M2, M2);
  for (Eigen::Index p = 0; p < M; ++p) {
    for (Eigen::Index r = 0; r < M; ++r) {
      const double b = mu * B(p, r);
      if (b == 0.0) continue;
      for (Eigen::Index q = 0; q < M; ++q) {
        K(p * M + q, r * M + q) += b;
        K(q * M + p, q * M + r) += b;
      }
    }
  }
  const Eigen::MatrixXd S = a_check_sum(st);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(S.data(), M2);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  if (!(lu.rcond() > 1e-14)) throw ModelError("I - F is singular or ill-conditioned");
  const Eigen::VectorXd x = lu.solve(rhs);
  double tr = 0.0;
  for (Eigen::Index m = 0; m < M; ++m) tr += x[m * M + m];
  return mu * mu * tr;
}

double msd_white_closed_form(double mu, std::size_t n_subbands, std::size_t filter_length,
                             std::span<const double> band_powers,
                             std::span<const double> omega_inf) {
  if (band_powers.size() != n_subbands || omega_inf.size() != n_subbands) {
    throw ParameterError("need one band power and one Omega per subband");
  }
  double denom = 0.0;
  for (std::size_t i = 0; i < n_subbands; ++i) denom += omega_inf[i] * std::sqrt(band_powers[i]);
  if (!(denom > 0.0)) throw ParameterError("white closed form: zero denominator");
  return mu * static_cast<double>(n_subbands) * std::sqrt(static_cast<double>(filter_length)) /
         (2.0 * denom);
}

double stability_upper_bound(std::span<const double> band_powers,
                             std::span<const double> band_energy, const CgNoiseSpec& noise,
                             std::size_t filter_length, bool use_impulse_term) {
  const std::size_t N = band_powers.size();
  if (N == 0 || band_energy.size() != N || filter_length == 0) {
    throw ParameterError("stability bound: inconsistent band data");
  }
  const double c = use_impulse_term ? 1.0 - noise.p_r : 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double omega_min =
        kSqrt2OverPi * c / std::sqrt(band_powers[i] + band_energy[i] * noise.sigma_g2);
    acc += omega_min * std::sqrt(band_powers[i]);
  }
  return 2.0 / static_cast<double>(N) * acc / std::sqrt(static_cast<double>(filter_length));
}

double stability_upper_bound(const TheoryModel& model, bool use_impulse_term) {
  model.validate();
  return stability_upper_bound(model.stats->band_power, model.band_energy, model.noise,
                               model.filter_length(), use_impulse_term);
}

std::vector<GaussianMoments> phi_moments(const TheoryState& state, const Eigen::VectorXd& w_opt) {
  const Eigen::Index M = w_opt.size();
  if (state.mean_phi_tilde.size() != M) throw ParameterError("phi_moments: length mismatch");
  std::vector<GaussianMoments> out(static_cast<std::size_t>(M));
  for (Eigen::Index m = 0; m < M; ++m) {
    const double z = state.mean_phi_tilde[m];
    out[m].mean = w_opt[m] - z;
    out[m].variance = std::max(state.Phi_tilde(m, m) - z * z, 0.0);
  }
  return out;
}

RhoUpperBound rho_upper_bound(std::span<const GaussianMoments> phi_stats,
                              std::span<const double> w_opt, double xi) {
  if (phi_stats.size() != w_opt.size()) throw ParameterError("rho_upper_bound: length mismatch");
  RhoUpperBound r;
  for (std::size_t m = 0; m < phi_stats.size(); ++m) {
    const GaussianMomentValues v = gaussian_moment_eval(phi_stats[m], xi);
    r.cross_moment += v.h_mean * w_opt[m] - v.h_phi_mean;
    r.subgradient_power += v.h_sq_mean;
  }
  r.feasible = r.cross_moment < 0.0;
  if (r.subgradient_power > 0.0) r.rho_up = -2.0 * r.cross_moment / r.subgradient_power;
  return r;
}

}  // namespace ssaf
