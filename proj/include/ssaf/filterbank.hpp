// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Cosine-modulated analysis filter bank and the multiband partitioning that
// turns fullband (u, d) streams into decimated subband regressors and desired
// samples.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace ssaf {

struct FilterBank {
  std::size_t n_subbands = 0;
  std::size_t filter_length = 0;
  std::vector<std::vector<double>> impulse_responses;
  std::vector<double> per_band_energy;  // ||h_i||^2

  // Validates shapes and fills per_band_energy.
  static FilterBank from_coefficients(std::vector<std::vector<double>> rows);
};

// Hamming-windowed ideal lowpass prototype (cutoff pi / 2N) scaled to energy
// 1 / 2N, modulated by 2 cos((2i+1) pi/(2N) (n - (L-1)/2) + (-1)^i pi/4).
FilterBank design_cosine_modulated(std::size_t n_subbands, std::size_t filter_length);
FilterBank design_cosine_modulated(std::size_t n_subbands);  // L = 8N

// N = 1, h_0 = [1]: partitioning degenerates to the fullband regressor.
FilterBank identity_bank();

nlohmann::json filter_bank_to_json(const FilterBank& bank);
FilterBank filter_bank_from_json(const nlohmann::json& j);

// Decimated-time bundle for iteration k (fullband time n = kN).
struct SubbandFrame {
  std::size_t k = 0;
  std::vector<std::vector<double>> regressors;  // u_i(k), length M each
  std::vector<double> desired;                  // d_{i,D}(k)
  std::vector<double> regressor_norms;          // ||u_i(k)||_2

  std::size_t n_subbands() const { return desired.size(); }
};

// Streaming partitioner. Holds the analysis delay lines for one (u, d) stream;
// samples before the first push are zero.
class Partitioner {
 public:
  Partitioner(const FilterBank& bank, std::size_t filter_length);

  // Consumes u(n), d(n). Returns true when n is a multiple of N, in which case
  // frame() holds the frame for k = n / N.
  bool push(double u, double d);

  const SubbandFrame& frame() const { return frame_; }
  std::size_t samples_consumed() const { return n_; }

 private:
  FilterBank bank_;  // owned copy; banks are small
  std::size_t m_;
  std::size_t n_ = 0;
  std::vector<double> u_line_;
  std::vector<double> d_line_;
  std::size_t line_pos_ = 0;
  // u_i(n) history per band, the last M samples.
  std::vector<std::vector<double>> band_history_;
  std::size_t hist_pos_ = 0;
  SubbandFrame frame_;
};

// Batch convenience over Partitioner.
std::vector<SubbandFrame> partition(const FilterBank& bank, std::span<const double> u,
                                    std::span<const double> d, std::size_t filter_length);

// e_{i,D}(k) = d_{i,D}(k) - u_i(k)^T w.
std::vector<double> subband_error(const SubbandFrame& frame, std::span<const double> w);
void subband_error(const SubbandFrame& frame, std::span<const double> w, std::span<double> out);

}  // namespace ssaf
