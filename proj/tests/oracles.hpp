// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Reference implementations used only by tests. They are written directly
// from the defining formulas and share no code with the library beyond the
// RNG type.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Fullband normalized sign algorithm on the tapped delay line
// x(n) = [u(n), ..., u(n-M+1)]:
//   e = d(n) - x^T w,  w += mu sgn(e) x / sqrt(||x||^2 + delta).
// Returns w after every update.
inline std::vector<std::vector<double>> normalized_sign_algorithm(const std::vector<double>& u,
                                                                  const std::vector<double>& d,
                                                                  std::size_t M, double mu,
                                                                  double delta) {
  std::vector<double> w(M, 0.0);
  std::vector<double> x(M, 0.0);
  std::vector<std::vector<double>> out;
  out.reserve(u.size());
  for (std::size_t n = 0; n < u.size(); ++n) {
    for (std::size_t m = M - 1; m > 0; --m) x[m] = x[m - 1];
    x[0] = u[n];
    double y = 0.0;
    double energy = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      y += x[m] * w[m];
      energy += x[m] * x[m];
    }
    const double e = d[n] - y;
    const double denom = std::sqrt(energy + delta);
    if (denom != 0.0 && e != 0.0) {
      const double g = mu * sign(e) / denom;
      for (std::size_t m = 0; m < M; ++m) w[m] += g * x[m];
    }
    out.push_back(w);
  }
  return out;
}

// Per-band analysis outputs x_i(n) = sum_l h_i[l] x(n - l), zero prehistory.
inline std::vector<double> convolve(const std::vector<double>& h, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t l = 0; l < h.size(); ++l) acc += n >= l ? h[l] * x[n - l] : 0.0;
    y[n] = acc;
  }
  return y;
}

struct DirectFrame {
  std::vector<std::vector<double>> regressors;
  std::vector<double> desired;
};

// Multiband partition by full convolution: u_i(k) = [u_i(kN), ..., u_i(kN-M+1)],
// d_{i,D}(k) = d_i(kN).
inline std::vector<DirectFrame> direct_partition(const std::vector<std::vector<double>>& bank,
                                                 const std::vector<double>& u,
                                                 const std::vector<double>& d, std::size_t M) {
  const std::size_t N = bank.size();
  std::vector<std::vector<double>> ui, di;
  for (const auto& h : bank) {
    ui.push_back(convolve(h, u));
    di.push_back(convolve(h, d));
  }
  std::vector<DirectFrame> frames;
  for (std::size_t n = 0; n < u.size(); n += N) {
    DirectFrame f;
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<double> r(M, 0.0);
      for (std::size_t m = 0; m < M && m <= n; ++m) r[m] = ui[i][n - m];
      f.regressors.push_back(std::move(r));
      f.desired.push_back(di[i][n]);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

// VP-S-IWF-SSAF written step by step from its pseudocode, with the smoothing
// in its textbook form beta mu + (1 - beta) min(raw, mu).
struct VpOracle {
  std::size_t M, N;
  double mu_min, mu_max, beta, chi, xi, delta;
  std::vector<double> w, w_hat, mu_o;
  double h_w_hat = 0.0;
  double rho = 0.0;
  std::size_t k = 0;

  VpOracle(std::size_t m, std::size_t n, double mu_min_, double mu_max_, double beta_,
           double chi_, double xi_, double delta_)
      : M(m), N(n), mu_min(mu_min_), mu_max(mu_max_), beta(beta_), chi(chi_), xi(xi_),
        delta(delta_), w(m, 0.0), w_hat(m, 0.0), mu_o(n, mu_max_) {}

  double H(const std::vector<double>& v) const {
    double s = 0.0;
    for (double x : v) s += std::log(1.0 + std::fabs(x) / xi);
    return s;
  }
  double dH(double x) const { return sign(x) / (xi + std::fabs(x)); }

  void step(const std::vector<std::vector<double>>& u, const std::vector<double>& d) {
    std::vector<double> e(N), norm(N);
    for (std::size_t i = 0; i < N; ++i) {
      double y = 0.0, n2 = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        y += u[i][m] * w[m];
        n2 += u[i][m] * u[i][m];
      }
      e[i] = d[i] - y;
      norm[i] = std::sqrt(n2);
      double raw = std::fabs(e[i]) / (norm[i] + 1e-5);
      if (raw > mu_max) raw = mu_max;
      if (raw < mu_min) raw = mu_min;
      mu_o[i] = beta * mu_o[i] + (1.0 - beta) * std::min(raw, mu_o[i]);
    }
    std::vector<double> phi = w;
    for (std::size_t i = 0; i < N; ++i) {
      const double denom = std::sqrt(norm[i] * norm[i] + delta);
      if (denom == 0.0) continue;
      for (std::size_t m = 0; m < M; ++m) phi[m] += mu_o[i] * sign(e[i]) * u[i][m] / denom;
    }
    rho = 0.0;
    if (k > 0) {
      double g2 = 0.0;
      for (double x : phi) g2 += dH(x) * dH(x);
      if (g2 > 0.0) rho = chi * std::max(H(phi) - h_w_hat, 0.0) / g2;
    }
    for (std::size_t m = 0; m < M; ++m) w[m] = phi[m] - rho * dH(phi[m]);
    for (std::size_t m = 0; m < M; ++m) w_hat[m] = k == 0 ? phi[m] : 0.5 * w_hat[m] + 0.5 * phi[m];
    h_w_hat = H(w_hat);
    ++k;
  }
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Running mean and standard error of a sample stream.
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  MomentEstimate estimate() const {
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct GaussianMomentMc {
  MomentEstimate abs_mean, sgn_mean, h_mean, h_phi_mean, h_sq_mean;
};

// Monte-Carlo moments of phi ~ N(mean, sd^2) under the log-penalty
// subgradient H'(phi) = sgn(phi) / (xi + |phi|).
inline GaussianMomentMc gaussian_moments_mc(double mean, double sd, double xi, std::size_t n,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(mean, sd);
  MeanAccumulator a, s, h, hp, hs;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g(rng);
    const double hx = sign(x) / (xi + std::fabs(x));
    a.add(std::fabs(x));
    s.add(sign(x));
    h.add(hx);
    hp.add(hx * x);
    hs.add(hx * hx);
  }
  return {a.estimate(), s.estimate(), h.estimate(), hp.estimate(), hs.estimate()};
}

// E{x sgn(y)} for zero-mean jointly Gaussian (x, y) with unit variances and
// correlation r.
inline MomentEstimate price_mc(double r, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MeanAccumulator acc;
  const double c = std::sqrt(1.0 - r * r);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = g(rng);
    const double x = r * y + c * g(rng);
    acc.add(x * sign(y));
  }
  return acc.estimate();
}

}  // namespace oracle
