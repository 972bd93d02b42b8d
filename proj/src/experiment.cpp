// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "ssaf/errors.hpp"
#include "ssaf/random.hpp"

namespace ssaf {
namespace {

constexpr std::size_t kCalibrationProbe = 100000;

std::vector<double> load_system_file(const std::string& path, std::size_t length) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open system file: " + path);
  std::vector<double> w;
  try {
    nlohmann::json j;
    in >> j;
    w = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("system file must hold a JSON array of numbers: " + path);
  }
  if (w.size() != length) {
    throw ParameterError("system file has " + std::to_string(w.size()) + " taps, expected " +
                         std::to_string(length));
  }
  return w;
}

struct TrialOutput {
  std::vector<std::vector<double>> msd;  // per algorithm, per k
  std::vector<bool> diverged;
  std::vector<std::size_t> step_size_increases;
  double norm2 = 0.0;
};

TrialOutput run_trial(const ExperimentConfig& cfg, const FilterBank& bank, std::size_t t) {
  const std::size_t M = cfg.filter_length;
  const std::size_t n_samples = cfg.samples;
  const TrialSetup setup = trial_setup(cfg, t);
  const std::vector<double> u =
      generate_input(cfg.input, n_samples, derive_seed(cfg.seed, t, StreamRole::kInput));

  const std::vector<double>& w0 = setup.system;
  std::vector<double> w1;
  std::vector<double> y = fir_filter(w0, u);
  std::size_t change_at = n_samples;
  if (cfg.sudden_change && cfg.sudden_change->at_sample < n_samples) {
    change_at = cfg.sudden_change->at_sample;
    w1 = shift_system(w0, cfg.sudden_change->shift_taps);
    const std::vector<double> y1 = fir_filter(w1, u);
    std::copy(y1.begin() + static_cast<std::ptrdiff_t>(change_at), y1.end(),
              y.begin() + static_cast<std::ptrdiff_t>(change_at));
  }

  std::vector<double> v;
  const std::uint64_t noise_seed = derive_seed(cfg.seed, t, StreamRole::kNoise);
  if (cfg.noise.kind == NoiseKind::kCg) {
    CgNoiseSpec spec = cfg.noise.cg;
    spec.sigma_g2 = setup.sigma_g2;
    v = generate_cg_noise(spec, n_samples, noise_seed);
  } else if (cfg.noise.kind == NoiseKind::kAlphaStable) {
    v = generate_alpha_stable(cfg.noise.alpha, n_samples, noise_seed);
  } else {
    v.assign(n_samples, 0.0);
  }

  std::vector<double> d(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) d[n] = y[n] + v[n];
  const double echo_power = mean_power(y);
  if (cfg.double_talk && cfg.double_talk->start < n_samples) {
    const DoubleTalkConfig& dt = *cfg.double_talk;
    const std::size_t len = std::min(dt.length, n_samples - dt.start);
    if (len > 0) {
      const std::vector<double> s =
          generate_speech_like(len, derive_seed(cfg.seed, t, StreamRole::kNearEnd));
      const double gain = std::sqrt(echo_power * std::pow(10.0, dt.power_ratio_db / 10.0));
      for (std::size_t i = 0; i < len; ++i) d[dt.start + i] += gain * s[i];
    }
  }

  std::vector<AdaptiveFilter> filters;
  filters.reserve(cfg.algorithms.size());
  for (AlgorithmConfig a : cfg.algorithms) {
    if (a.kind == AlgorithmKind::kVpSIwfSsaf && a.mu_max <= 0.0) {
      a.mu_max = mu_max_default(echo_power, mean_power(u), M);
    }
    filters.emplace_back(a, cfg.n_subbands, M);
    if (cfg.start_at_optimum) filters.back().set_weights(w0);
  }

  const std::size_t A = filters.size();
  const std::size_t K = cfg.frame_count();
  TrialOutput out;
  out.msd.assign(A, std::vector<double>(K, 0.0));
  out.diverged.assign(A, false);
  out.step_size_increases.assign(A, 0);
  for (double x : w0) out.norm2 += x * x;

  std::vector<std::vector<double>> prev_mu(A);
  for (std::size_t a = 0; a < A; ++a) prev_mu[a] = filters[a].state().mu_o;

  Partitioner part(bank, M);
  for (std::size_t n = 0; n < n_samples; ++n) {
    if (!part.push(u[n], d[n])) continue;
    const SubbandFrame& frame = part.frame();
    const std::vector<double>& wopt = n >= change_at ? w1 : w0;
    for (std::size_t a = 0; a < A; ++a) {
      if (out.diverged[a]) continue;
      const std::vector<double>& w = filters[a].weights();
      double msd = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        const double dev = wopt[m] - w[m];
        msd += dev * dev;
      }
      out.msd[a][frame.k] = msd;
      try {
        filters[a].adapt(frame);
      } catch (const DivergenceError&) {
        out.diverged[a] = true;
        continue;
      }
      if (filters[a].config().kind == AlgorithmKind::kVpSIwfSsaf) {
        const std::vector<double>& mu = filters[a].state().mu_o;
        for (std::size_t i = 0; i < mu.size(); ++i)
          if (mu[i] > prev_mu[a][i]) ++out.step_size_increases[a];
        prev_mu[a] = mu;
      }
    }
  }
  // Increases the VSS guard caught and clamped count as well.
  for (std::size_t a = 0; a < A; ++a)
    out.step_size_increases[a] += filters[a].state().step_size_increases;
  return out;
}

std::vector<double> strided(const std::vector<double>& x, std::size_t stride) {
  std::vector<double> out;
  out.reserve((x.size() + stride - 1) / stride);
  for (std::size_t k = 0; k < x.size(); k += stride) out.push_back(x[k]);
  return out;
}

bool theory_supported(const AlgorithmConfig& a) {
  return a.kind == AlgorithmKind::kIwfSsaf || a.kind == AlgorithmKind::kSIwfSsaf;
}

}  // namespace

std::vector<std::size_t> RunResult::row_index() const {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < frames; k += metrics_stride) idx.push_back(k);
  return idx;
}

double to_db(double x) { return 10.0 * std::log10(x); }

double steady_state_db(const std::vector<double>& msd_linear, std::size_t window) {
  if (msd_linear.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t w = std::min(window, msd_linear.size());
  double acc = 0.0;
  for (std::size_t k = msd_linear.size() - w; k < msd_linear.size(); ++k) acc += msd_linear[k];
  return to_db(acc / static_cast<double>(w));
}

std::vector<double> shift_system(const std::vector<double>& w, std::size_t shift_taps) {
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t m = 0; m + shift_taps < w.size(); ++m) out[m + shift_taps] = w[m];
  return out;
}

TrialSetup trial_setup(const ExperimentConfig& cfg, std::size_t trial) {
  const std::size_t t = cfg.system.per_trial ? trial : 0;
  const std::uint64_t sys_seed = derive_seed(cfg.seed, t, StreamRole::kSystem);
  const std::size_t M = cfg.filter_length;
  TrialSetup s;
  switch (cfg.system.kind) {
    case SystemKind::kSparse:
      s.system = generate_sparse_system(
          {M, cfg.system.nonzero_count, cfg.system.normalize_unit_norm}, sys_seed);
      break;
    case SystemKind::kUniform:
      s.system = generate_uniform_system(M, cfg.system.normalize_unit_norm, sys_seed);
      break;
    case SystemKind::kEchoChannel:
      s.system = generate_synthetic_echo_channel(M, sys_seed);
      break;
    case SystemKind::kFile:
      s.system = load_system_file(cfg.system.path, M);
      break;
  }
  if (cfg.noise.kind == NoiseKind::kCg) {
    s.sigma_g2 = cfg.noise.snr_db
                     ? calibrate_snr(s.system, cfg.input, *cfg.noise.snr_db, kCalibrationProbe,
                                     derive_seed(cfg.seed, t, StreamRole::kProbe))
                     : cfg.noise.cg.sigma_g2;
  }
  return s;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const FilterBank bank = design_cosine_modulated(cfg.n_subbands, cfg.effective_bank_length());
  const std::size_t A = cfg.algorithms.size();
  const std::size_t K = cfg.frame_count();

  std::size_t threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.trials);

  std::vector<std::vector<double>> sum(A, std::vector<double>(K, 0.0));
  std::vector<std::size_t> ok(A, 0);
  std::vector<std::size_t> increases(A, 0);
  double norm2_sum = 0.0;

  // Trials run in waves; results are folded in trial order so the sums never
  // depend on the thread count.
  for (std::size_t base = 0; base < cfg.trials; base += threads) {
    const std::size_t wave = std::min(threads, cfg.trials - base);
    std::vector<TrialOutput> outputs(wave);
    std::vector<std::exception_ptr> errors(wave);
    auto work = [&](std::size_t j) {
      try {
        outputs[j] = run_trial(cfg, bank, base + j);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    };
    if (wave == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < wave; ++j) pool.emplace_back(work, j);
      for (auto& th : pool) th.join();
    }
    for (std::size_t j = 0; j < wave; ++j) {
      if (errors[j]) std::rethrow_exception(errors[j]);
      const TrialOutput& o = outputs[j];
      norm2_sum += o.norm2;
      for (std::size_t a = 0; a < A; ++a) {
        increases[a] += o.step_size_increases[a];
        if (o.diverged[a]) continue;
        ++ok[a];
        for (std::size_t k = 0; k < K; ++k) sum[a][k] += o.msd[a][k];
      }
    }
  }

  RunResult r;
  r.scenario = cfg.scenario;
  r.n_subbands = cfg.n_subbands;
  r.trials = cfg.trials;
  r.frames = K;
  r.metrics_stride = cfg.metrics_stride;
  r.reference_norm2 = norm2_sum / static_cast<double>(cfg.trials);
  r.config_digest = config_digest(cfg);
  const double ref_db = to_db(r.reference_norm2);

  bool any_ok = A == 0;
  for (std::size_t a = 0; a < A; ++a) {
    AlgorithmSeries s;
    s.label = cfg.algorithms[a].display_name();
    s.kind = cfg.algorithms[a].kind;
    s.diverged_trials = cfg.trials - ok[a];
    s.all_diverged = ok[a] == 0;
    s.step_size_increases = increases[a];
    s.msd.assign(K, std::numeric_limits<double>::quiet_NaN());
    if (ok[a] > 0) {
      any_ok = true;
      for (std::size_t k = 0; k < K; ++k) s.msd[k] = sum[a][k] / static_cast<double>(ok[a]);
    }
    std::vector<double> db(K);
    for (std::size_t k = 0; k < K; ++k) db[k] = to_db(s.msd[k]);
    s.msd_db = strided(db, cfg.metrics_stride);
    s.nmsd_db = s.msd_db;
    for (double& x : s.nmsd_db) x -= ref_db;
    s.steady_state_msd_db = steady_state_db(s.msd);
    s.steady_state_nmsd_db = s.steady_state_msd_db - ref_db;
    r.series.push_back(std::move(s));
  }
  if (!any_ok) throw DivergenceError("every trial of every algorithm diverged", 0);

  if (cfg.theory.enabled && cfg.noise.kind == NoiseKind::kCg && !cfg.start_at_optimum) {
    std::shared_ptr<const EnsembleStats> stats;
    for (const auto& a : cfg.algorithms) {
      if (!theory_supported(a)) continue;
      if (!stats) stats = theory_model_for(cfg, a.xi).stats;
      const TheoryModel model = theory_model_for(cfg, a.xi, stats);
      const double rho = a.kind == AlgorithmKind::kSIwfSsaf ? a.rho : 0.0;
      TheorySeries ts;
      ts.label = a.display_name();
      std::vector<double> msd;
      try {
        msd = theory_msd_trajectory(model, a.mu, rho, K - 1);
      } catch (const DivergenceError&) {
        msd.clear();
      }
      msd.resize(K, std::numeric_limits<double>::infinity());
      for (double& x : msd) x = to_db(x);
      ts.msd_db = strided(msd, cfg.metrics_stride);
      r.theory.push_back(std::move(ts));
    }
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

TheoryModel theory_model_for(const ExperimentConfig& cfg, double xi,
                             std::shared_ptr<const EnsembleStats> stats) {
  if (cfg.noise.kind != NoiseKind::kCg) {
    throw ModelError("the analytical model covers contaminated-Gaussian noise only");
  }
  const FilterBank bank = design_cosine_modulated(cfg.n_subbands, cfg.effective_bank_length());
  if (!stats) {
    stats = std::make_shared<const EnsembleStats>(estimate_ensemble_stats(
        cfg.input, bank, cfg.filter_length, cfg.seed, cfg.theory.ensemble));
  }
  const TrialSetup setup = trial_setup(cfg, 0);
  CgNoiseSpec noise = cfg.noise.cg;
  noise.sigma_g2 = setup.sigma_g2;
  return make_theory_model(std::move(stats), bank, noise, setup.system, xi);
}

TheorySeries theory_overlay(const ExperimentConfig& cfg, const AlgorithmConfig& algorithm) {
  if (!theory_supported(algorithm)) {
    throw ModelError("no analytical model for " + std::string(to_string(algorithm.kind)) +
                     "; only fixed-parameter iwf_ssaf and s_iwf_ssaf are modelled");
  }
  cfg.validate();
  if (cfg.start_at_optimum) throw ModelError("the analytical model starts from w(0) = 0");
  const TheoryModel model = theory_model_for(cfg, algorithm.xi);
  const double rho = algorithm.kind == AlgorithmKind::kSIwfSsaf ? algorithm.rho : 0.0;
  const std::size_t K = cfg.frame_count();
  std::vector<double> msd;
  try {
    msd = theory_msd_trajectory(model, algorithm.mu, rho, K - 1);
  } catch (const DivergenceError&) {
    msd.clear();
  }
  msd.resize(K, std::numeric_limits<double>::infinity());
  TheorySeries ts;
  ts.label = algorithm.display_name();
  for (double x : msd) ts.msd_db.push_back(to_db(x));
  return ts;
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kMu: return "mu";
    case SweepParameter::kRho: return "rho";
    case SweepParameter::kN: return "N";
    case SweepParameter::kM: return "M";
    case SweepParameter::kPr: return "p_r";
    case SweepParameter::kSnr: return "snr";
  }
  return "unknown";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  for (auto p : {SweepParameter::kMu, SweepParameter::kRho, SweepParameter::kN, SweepParameter::kM,
                 SweepParameter::kPr, SweepParameter::kSnr}) {
    if (to_string(p) == s) return p;
  }
  if (s == "n") return SweepParameter::kN;
  if (s == "m") return SweepParameter::kM;
  if (s == "pr") return SweepParameter::kPr;
  throw ParameterError("unknown sweep parameter: " + s);
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepParameter p, double value) {
  ExperimentConfig c = cfg;
  const auto as_count = [value]() {
    if (!(value >= 1.0)) throw ParameterError("sweep value must be a positive integer");
    return static_cast<std::size_t>(std::llround(value));
  };
  switch (p) {
    case SweepParameter::kMu:
      for (auto& a : c.algorithms) a.mu = value;
      break;
    case SweepParameter::kRho:
      for (auto& a : c.algorithms) a.rho = value;
      break;
    case SweepParameter::kN:
      c.n_subbands = as_count();
      c.bank_length = 0;
      break;
    case SweepParameter::kM:
      c.filter_length = as_count();
      c.system.nonzero_count = std::min(c.system.nonzero_count, c.filter_length);
      break;
    case SweepParameter::kPr:
      c.noise.cg.p_r = value;
      break;
    case SweepParameter::kSnr:
      c.noise.snr_db = value;
      break;
  }
  c.validate();
  return c;
}

SweepTable sweep(const ExperimentConfig& cfg, SweepParameter parameter,
                 const std::vector<double>& grid, bool with_theory) {
  if (grid.empty()) throw ParameterError("sweep grid is empty");
  SweepTable table;
  table.parameter = parameter;
  for (const auto& a : cfg.algorithms) table.labels.push_back(a.display_name());

  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::shared_ptr<const EnsembleStats>>
      cache;
  SteadyStateOptions ss;
  ss.max_iter = 100000;

  for (double value : grid) {
    ExperimentConfig c = apply_sweep_value(cfg, parameter, value);
    c.theory.enabled = false;
    const RunResult r = run_experiment(c);
    SweepRow row;
    row.value = value;
    for (const auto& s : r.series) {
      row.steady_state_msd_db.push_back(s.steady_state_msd_db);
      row.diverged_trials.push_back(s.diverged_trials);
    }
    for (const auto& a : c.algorithms) {
      double th = std::numeric_limits<double>::quiet_NaN();
      if (with_theory && theory_supported(a) && c.noise.kind == NoiseKind::kCg) {
        const auto key = std::make_tuple(c.n_subbands, c.effective_bank_length(), c.filter_length);
        auto& stats = cache[key];
        try {
          const TheoryModel model = theory_model_for(c, a.xi, stats);
          stats = model.stats;
          const double rho = a.kind == AlgorithmKind::kSIwfSsaf ? a.rho : 0.0;
          th = to_db(steady_state_msd(model, a.mu, rho, ss).msd);
        } catch (const ModelError&) {
        } catch (const DivergenceError&) {
        }
      }
      row.theory_msd_db.push_back(th);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  try {
    if (spec.find(':') != std::string::npos) {
      std::stringstream ss(spec);
      std::string a, b, c;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, c, ':');
      const double lo = std::stod(a);
      const double hi = std::stod(b);
      const double step = std::stod(c);
      if (!(step > 0.0) || hi < lo) throw ParameterError("grid needs lo <= hi and step > 0");
      const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
      for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
      }
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ParameterError*>(&e)) throw;
    throw ParameterError("cannot parse grid '" + spec + "'");
  }
  if (out.empty()) throw ParameterError("grid '" + spec + "' is empty");
  return out;
}

}  // namespace ssaf
