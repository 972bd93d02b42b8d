// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ssaf/errors.hpp"
#include "ssaf/random.hpp"

namespace ssaf {
namespace {

constexpr std::size_t kArBurnIn = 1000;

}  // namespace

void InputSpec::validate() const {
  if (kind == InputKind::kWavFile) {
    if (wav_path.empty()) throw ParameterError("wavfile input requires wav_path");
    return;
  }
  if (!(innovation_variance > 0.0)) throw ParameterError("innovation_variance must be > 0");
  if (kind == InputKind::kAr1 && !(std::abs(ar_coefficient) < 1.0)) {
    throw ParameterError("ar_coefficient must satisfy |a| < 1");
  }
}

void CgNoiseSpec::validate() const {
  if (!(p_r >= 0.0 && p_r <= 1.0)) throw ParameterError("p_r must lie in [0, 1]");
  if (!(sigma_g2 > 0.0)) throw ParameterError("sigma_g2 must be > 0");
  if (!(hbar >= 1.0)) throw ParameterError("hbar must be >= 1");
}

void AlphaStableSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("alpha must lie in (0, 2]");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
}

std::vector<double> generate_input(const InputSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("sample count must be > 0");
  spec.validate();
  if (spec.kind == InputKind::kWavFile) {
    WavData wav = load_wav(spec.wav_path);
    if (wav.samples.empty()) throw IngestionError("WAV file has no samples: " + spec.wav_path);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = wav.samples[i % wav.samples.size()];
    return out;
  }

  const double a = spec.kind == InputKind::kAr1 ? spec.ar_coefficient : 0.0;
  Rng rng(seed);
  std::normal_distribution<double> eps(0.0, std::sqrt(spec.innovation_variance));
  double state = 0.0;
  for (std::size_t i = 0; i < kArBurnIn; ++i) state = a * state + eps(rng);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    state = a * state + eps(rng);
    out[i] = state;
  }
  return out;
}

std::vector<double> generate_cg_noise(const CgNoiseSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("sample count must be > 0");
  spec.validate();
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sg = std::sqrt(spec.sigma_g2);
  const double se = std::sqrt(spec.hbar * spec.sigma_g2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double vg = sg * gauss(rng);
    const bool impulse = unit(rng) < spec.p_r;
    const double eta = se * gauss(rng);
    out[i] = impulse ? vg + eta : vg;
  }
  return out;
}

std::vector<double> generate_alpha_stable(const AlphaStableSpec& spec, std::size_t n,
                                          std::uint64_t seed) {
  if (n == 0) throw ParameterError("sample count must be > 0");
  spec.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::exponential_distribution<double> expo(1.0);
  const double a = spec.alpha;
  const double scale = std::pow(spec.gamma, 1.0 / a);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = angle(rng);
    // Keep away from the +-pi/2 endpoints where cos(v) underflows.
    v = std::clamp(v, -std::numbers::pi / 2.0 + 1e-12, std::numbers::pi / 2.0 - 1e-12);
    double w = expo(rng);
    if (w <= 0.0) w = std::numeric_limits<double>::min();
    double x;
    if (std::abs(a - 1.0) < 1e-12) {
      x = std::tan(v);
    } else {
      x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
          std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
    }
    out[i] = scale * x;
  }
  return out;
}

double calibrate_snr(std::span<const double> system, const InputSpec& input, double snr_db,
                     std::size_t n_probe, std::uint64_t seed) {
  if (std::all_of(system.begin(), system.end(), [](double x) { return x == 0.0; })) {
    throw CalibrationError("cannot calibrate SNR against an all-zero system");
  }
  const std::vector<double> u = generate_input(input, n_probe, seed);
  const std::vector<double> y = fir_filter(system, u);
  // Skip the transient where the regressor still contains zero prehistory.
  const std::size_t skip = std::min(system.size(), y.size() - 1);
  const double power = mean_power(std::span<const double>(y).subspan(skip));
  if (!(power > 0.0)) throw CalibrationError("probe output has zero power");
  return power / std::pow(10.0, snr_db / 10.0);
}

std::vector<double> generate_sparse_system(const SparseSystemSpec& spec, std::uint64_t seed) {
  if (spec.length == 0) throw ParameterError("system length must be > 0");
  if (spec.nonzero_count > spec.length) throw ParameterError("nonzero_count exceeds length");
  std::vector<double> w(spec.length, 0.0);
  if (spec.nonzero_count == 0) return w;

  Rng rng(seed);
  // Partial Fisher-Yates: the first nonzero_count entries become a uniform
  // random subset of positions.
  std::vector<std::size_t> pos(spec.length);
  std::iota(pos.begin(), pos.end(), 0);
  for (std::size_t i = 0; i < spec.nonzero_count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, spec.length - 1);
    std::swap(pos[i], pos[pick(rng)]);
  }
  const double sd = std::pow(static_cast<double>(spec.nonzero_count), -0.25);
  std::normal_distribution<double> gauss(0.0, sd);
  for (std::size_t i = 0; i < spec.nonzero_count; ++i) {
    double v = gauss(rng);
    while (v == 0.0) v = gauss(rng);
    w[pos[i]] = v;
  }
  if (spec.normalize_unit_norm) {
    const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    for (double& x : w) x /= norm;
  }
  return w;
}

std::vector<double> generate_uniform_system(std::size_t length, bool normalize_unit_norm,
                                            std::uint64_t seed) {
  if (length == 0) throw ParameterError("system length must be > 0");
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<double> w(length);
  for (double& x : w) x = dist(rng);
  if (normalize_unit_norm) {
    const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (norm > 0.0)
      for (double& x : w) x /= norm;
  }
  return w;
}

std::vector<double> generate_synthetic_echo_channel(std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ParameterError("channel length must be > 0");
  if (length == 1) return {1.0};

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> delay_pick(length / 32, length / 16);
  const std::size_t delay = delay_pick(rng);
  const double decay = std::max(1.0, static_cast<double>(length) / 64.0);

  std::vector<double> h(length, 0.0);
  // Direct path first, then the decaying reflection cluster.
  h[delay] = 1.0;
  for (std::size_t m = delay + 1; m < length; ++m) {
    h[m] = 0.6 * gauss(rng) * std::exp(-static_cast<double>(m - delay) / decay);
  }
  double peak = 0.0;
  for (double x : h) peak = std::max(peak, std::abs(x));
  for (double& x : h) x += 1e-3 * peak * gauss(rng);

  const double norm = std::sqrt(std::inner_product(h.begin(), h.end(), h.begin(), 0.0));
  for (double& x : h) x /= norm;
  return h;
}

std::vector<double> generate_speech_like(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("sample count must be > 0");
  InputSpec ar;
  std::vector<double> x = generate_input(ar, n, seed);
  Rng rng(splitmix64(seed));
  std::uniform_real_distribution<double> syllable(800.0, 2400.0);
  std::uniform_real_distribution<double> gain(0.3, 1.0);
  std::size_t pos = 0;
  while (pos < n) {
    const auto len = static_cast<std::size_t>(syllable(rng));
    const double g = gain(rng);
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double env = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
      x[pos + i] *= g * env;
    }
    pos += len;
  }
  const double p = mean_power(x);
  if (p > 0.0) {
    const double s = 1.0 / std::sqrt(p);
    for (double& v : x) v *= s;
  }
  return x;
}

std::vector<double> fir_filter(std::span<const double> w, std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t taps = std::min(w.size(), n + 1);
    double acc = 0.0;
    for (std::size_t m = 0; m < taps; ++m) acc += w[m] * x[n - m];
    y[n] = acc;
  }
  return y;
}

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace ssaf
