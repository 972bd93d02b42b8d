// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/filterbank.hpp"

#include <cmath>
#include <numbers>

#include "ssaf/errors.hpp"

namespace ssaf {

FilterBank FilterBank::from_coefficients(std::vector<std::vector<double>> rows) {
  if (rows.empty()) throw ParameterError("filter bank needs at least one band");
  const std::size_t len = rows.front().size();
  if (len == 0) throw ParameterError("filter length must be >= 1");
  FilterBank bank;
  bank.n_subbands = rows.size();
  bank.filter_length = len;
  for (const auto& r : rows) {
    if (r.size() != len) throw ParameterError("filter bank rows differ in length");
    double e = 0.0;
    for (double h : r) e += h * h;
    if (!(e > 0.0)) throw ParameterError("filter bank band has zero energy");
    bank.per_band_energy.push_back(e);
  }
  bank.impulse_responses = std::move(rows);
  return bank;
}

FilterBank design_cosine_modulated(std::size_t n_subbands, std::size_t filter_length) {
  if (n_subbands == 0) throw ParameterError("n_subbands must be >= 1");
  if (filter_length < n_subbands) throw ParameterError("filter length L must be >= N");
  if (n_subbands == 1 && filter_length == 1) return identity_bank();

  const auto N = static_cast<double>(n_subbands);
  const std::size_t L = filter_length;
  const double centre = (static_cast<double>(L) - 1.0) / 2.0;
  const double cutoff = std::numbers::pi / (2.0 * N);

  std::vector<double> proto(L);
  double energy = 0.0;
  for (std::size_t n = 0; n < L; ++n) {
    const double t = static_cast<double>(n) - centre;
    const double ideal =
        std::abs(t) < 1e-12 ? cutoff / std::numbers::pi : std::sin(cutoff * t) / (std::numbers::pi * t);
    const double window =
        L == 1 ? 1.0
               : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                        static_cast<double>(L - 1));
    proto[n] = ideal * window;
    energy += proto[n] * proto[n];
  }
  const double scale = std::sqrt(1.0 / (2.0 * N) / energy);
  for (double& p : proto) p *= scale;

  std::vector<std::vector<double>> rows(n_subbands, std::vector<double>(L));
  for (std::size_t i = 0; i < n_subbands; ++i) {
    const double freq = (2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi / (2.0 * N);
    const double phase = (i % 2 == 0 ? 1.0 : -1.0) * std::numbers::pi / 4.0;
    for (std::size_t n = 0; n < L; ++n) {
      const double t = static_cast<double>(n) - centre;
      rows[i][n] = 2.0 * proto[n] * std::cos(freq * t + phase);
    }
  }
  return FilterBank::from_coefficients(std::move(rows));
}

FilterBank design_cosine_modulated(std::size_t n_subbands) {
  return design_cosine_modulated(n_subbands, 8 * n_subbands);
}

FilterBank identity_bank() { return FilterBank::from_coefficients({{1.0}}); }

nlohmann::json filter_bank_to_json(const FilterBank& bank) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& row : bank.impulse_responses)
    for (double h : row) coeffs.push_back(h);
  return {{"N", bank.n_subbands}, {"L", bank.filter_length}, {"coefficients", coeffs}};
}

FilterBank filter_bank_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("N").get<std::size_t>();
    const auto l = j.at("L").get<std::size_t>();
    const auto flat = j.at("coefficients").get<std::vector<double>>();
    if (flat.size() != n * l) throw IngestionError("filter bank coefficient count != N*L");
    std::vector<std::vector<double>> rows(n, std::vector<double>(l));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < l; ++t) rows[i][t] = flat[i * l + t];
    return FilterBank::from_coefficients(std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed filter bank JSON: ") + e.what());
  }
}

Partitioner::Partitioner(const FilterBank& bank, std::size_t filter_length)
    : bank_(bank),
      m_(filter_length),
      u_line_(2 * bank.filter_length, 0.0),
      d_line_(2 * bank.filter_length, 0.0),
      band_history_(bank.n_subbands, std::vector<double>(2 * filter_length, 0.0)) {
  if (filter_length == 0) throw ParameterError("adaptive filter length M must be > 0");
  frame_.regressors.assign(bank.n_subbands, std::vector<double>(filter_length, 0.0));
  frame_.desired.assign(bank.n_subbands, 0.0);
  frame_.regressor_norms.assign(bank.n_subbands, 0.0);
}

bool Partitioner::push(double u, double d) {
  const std::size_t L = bank_.filter_length;
  const std::size_t N = bank_.n_subbands;

  // Mirrored circular buffers: every sample is stored at pos and pos + len, so
  // [pos, pos + len) is always a contiguous newest-first window.
  line_pos_ = line_pos_ == 0 ? L - 1 : line_pos_ - 1;
  u_line_[line_pos_] = u_line_[line_pos_ + L] = u;
  d_line_[line_pos_] = d_line_[line_pos_ + L] = d;
  const double* uw = u_line_.data() + line_pos_;

  hist_pos_ = hist_pos_ == 0 ? m_ - 1 : hist_pos_ - 1;
  for (std::size_t i = 0; i < N; ++i) {
    const double* h = bank_.impulse_responses[i].data();
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) acc += h[l] * uw[l];
    band_history_[i][hist_pos_] = band_history_[i][hist_pos_ + m_] = acc;
  }

  const std::size_t n = n_++;
  if (n % N != 0) return false;

  frame_.k = n / N;
  const double* dw = d_line_.data() + line_pos_;
  for (std::size_t i = 0; i < N; ++i) {
    const double* h = bank_.impulse_responses[i].data();
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) acc += h[l] * dw[l];
    frame_.desired[i] = acc;

    std::vector<double>& reg = frame_.regressors[i];
    const double* hist = band_history_[i].data() + hist_pos_;
    double norm2 = 0.0;
    for (std::size_t m = 0; m < m_; ++m) {
      reg[m] = hist[m];
      norm2 += reg[m] * reg[m];
    }
    frame_.regressor_norms[i] = std::sqrt(norm2);
  }
  return true;
}

std::vector<SubbandFrame> partition(const FilterBank& bank, std::span<const double> u,
                                    std::span<const double> d, std::size_t filter_length) {
  if (u.size() != d.size()) throw ParameterError("u and d must have equal length");
  Partitioner p(bank, filter_length);
  std::vector<SubbandFrame> frames;
  for (std::size_t n = 0; n < u.size(); ++n)
    if (p.push(u[n], d[n])) frames.push_back(p.frame());
  return frames;
}

void subband_error(const SubbandFrame& frame, std::span<const double> w, std::span<double> out) {
  const std::size_t N = frame.n_subbands();
  if (out.size() != N) throw ParameterError("error buffer size != N");
  for (std::size_t i = 0; i < N; ++i) {
    const std::vector<double>& reg = frame.regressors[i];
    if (reg.size() != w.size()) throw ParameterError("weight length != regressor length");
    double y = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) y += reg[m] * w[m];
    out[i] = frame.desired[i] - y;
  }
}

std::vector<double> subband_error(const SubbandFrame& frame, std::span<const double> w) {
  std::vector<double> e(frame.n_subbands());
  subband_error(frame, w, e);
  return e;
}

}  // namespace ssaf
