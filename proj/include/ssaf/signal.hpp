// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Input, system and noise generators for system identification and echo
// cancellation experiments. Every generator is a pure function of its spec,
// length and seed.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ssaf {

enum class InputKind { kWhite, kAr1, kWavFile };

struct InputSpec {
  InputKind kind = InputKind::kAr1;
  double ar_coefficient = 0.9;
  double innovation_variance = 1.0;
  std::string wav_path;

  void validate() const;
};

// Contaminated-Gaussian noise v = v_g + b * eta, b ~ Bernoulli(p_r),
// v_g ~ N(0, sigma_g2), eta ~ N(0, hbar * sigma_g2).
struct CgNoiseSpec {
  double p_r = 0.001;
  double sigma_g2 = 1e-3;
  double hbar = 300000.0;

  double variance() const { return sigma_g2 * (1.0 + p_r * hbar); }
  void validate() const;
};

// Symmetric alpha-stable law with characteristic function exp(-gamma |t|^alpha).
struct AlphaStableSpec {
  double alpha = 1.5;
  double gamma = 1.0 / 30.0;

  void validate() const;
};

struct SparseSystemSpec {
  std::size_t length = 64;
  std::size_t nonzero_count = 4;
  bool normalize_unit_norm = false;
};

struct WavData {
  std::vector<double> samples;
  unsigned sample_rate = 0;
};

// AR(1) recursion u(n) = a u(n-1) + eps(n) after a 1000-sample burn-in. White
// input is the a = 0 case. WAV input is loaded and repeated to length n.
std::vector<double> generate_input(const InputSpec& spec, std::size_t n, std::uint64_t seed);

std::vector<double> generate_cg_noise(const CgNoiseSpec& spec, std::size_t n, std::uint64_t seed);

// Chambers-Mallows-Stuck sampler, beta = 0.
std::vector<double> generate_alpha_stable(const AlphaStableSpec& spec, std::size_t n,
                                          std::uint64_t seed);

// Returns sigma_g2 = E{(u^T w)^2} / 10^(snr_db / 10), estimating the output
// power by filtering n_probe input samples through the system.
double calibrate_snr(std::span<const double> system, const InputSpec& input, double snr_db,
                     std::size_t n_probe, std::uint64_t seed);

// Nonzero taps at uniformly chosen positions, values ~ N(0, 1/sqrt(|NZ|)).
std::vector<double> generate_sparse_system(const SparseSystemSpec& spec, std::uint64_t seed);

// Dense system with taps ~ U[-0.5, 0.5].
std::vector<double> generate_uniform_system(std::size_t length, bool normalize_unit_norm,
                                            std::uint64_t seed);

// Synthetic stand-in for a measured room echo path: a short bulk delay, a
// cluster of exponentially decaying random taps and a -60 dB floor. Unit norm.
std::vector<double> generate_synthetic_echo_channel(std::size_t length, std::uint64_t seed);

// Speech-like near-end burst: AR(0.9) colored noise under a syllabic envelope,
// normalized to unit power.
std::vector<double> generate_speech_like(std::size_t n, std::uint64_t seed);

// PCM 16/32-bit or IEEE float32 little-endian RIFF. Multichannel files keep
// the first channel. Integer samples are scaled to [-1, 1).
WavData load_wav(const std::filesystem::path& path);

void write_wav_pcm16(const std::filesystem::path& path, std::span<const double> samples,
                     unsigned sample_rate);

// y(n) = sum_m w[m] x(n - m), zero prehistory.
std::vector<double> fir_filter(std::span<const double> w, std::span<const double> x);

double mean_power(std::span<const double> x);

}  // namespace ssaf
