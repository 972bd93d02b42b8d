// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Monte-Carlo ensemble runner, parameter sweeps and theory overlays.

#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ssaf/config.hpp"

namespace ssaf {

struct AlgorithmSeries {
  std::string label;
  AlgorithmKind kind = AlgorithmKind::kIwfSsaf;
  std::vector<double> msd;  // linear, ensemble mean over non-diverged trials, every k
  std::vector<double> msd_db;
  std::vector<double> nmsd_db;
  double steady_state_msd_db = 0.0;
  double steady_state_nmsd_db = 0.0;
  std::size_t diverged_trials = 0;
  bool all_diverged = false;
  // Increases of any mu_o,i(k) between consecutive iterations, summed over trials.
  std::size_t step_size_increases = 0;
};

struct TheorySeries {
  std::string label;
  std::vector<double> msd_db;  // aligned with AlgorithmSeries::msd_db
};

struct RunResult {
  Scenario scenario = Scenario::kSystemId;
  std::size_t n_subbands = 1;
  std::size_t trials = 0;
  std::size_t frames = 0;            // decimated iterations per trial
  std::size_t metrics_stride = 1;
  double reference_norm2 = 1.0;      // ||w_opt||^2, trial mean at k = 0
  std::vector<AlgorithmSeries> series;
  std::vector<TheorySeries> theory;
  std::string config_digest;
  double wall_seconds = 0.0;

  // Decimated iteration index of each emitted row.
  std::vector<std::size_t> row_index() const;
  bool empty() const { return series.empty(); }
};

// Steady-state window: the last 500 decimated iterations.
inline constexpr std::size_t kSteadyStateWindow = 500;

double to_db(double x);
double steady_state_db(const std::vector<double>& msd_linear, std::size_t window = kSteadyStateWindow);

// w_opt(n) for n >= at_sample under the sudden-change rule.
std::vector<double> shift_system(const std::vector<double>& w, std::size_t shift_taps);

// The unknown system and noise calibration used by trial t.
struct TrialSetup {
  std::vector<double> system;
  double sigma_g2 = 0.0;
};
TrialSetup trial_setup(const ExperimentConfig& cfg, std::size_t trial);

// Runs every algorithm on the same realizations in each trial. MSD(k) is
// sampled before the update of iteration k. Diverged trials are excluded per
// algorithm; throws DivergenceError only if every trial of every algorithm
// diverged.
RunResult run_experiment(const ExperimentConfig& cfg);

// Theory MSD(k) in dB for k = 0 .. frames - 1. Only fixed-parameter IWF-SSAF
// and S-IWF-SSAF under CG noise are modelled; anything else is a ModelError.
TheorySeries theory_overlay(const ExperimentConfig& cfg, const AlgorithmConfig& algorithm);

// Theory model for trial 0's system and noise calibration. Ensemble
// statistics are estimated unless supplied.
TheoryModel theory_model_for(const ExperimentConfig& cfg, double xi,
                             std::shared_ptr<const EnsembleStats> stats = nullptr);

enum class SweepParameter { kMu, kRho, kN, kM, kPr, kSnr };
std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

// Applies one sweep value to a copy of cfg.
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  std::vector<double> steady_state_msd_db;  // per algorithm
  std::vector<std::size_t> diverged_trials;
  std::vector<double> theory_msd_db;        // NaN where the model does not apply or diverges
};

struct SweepTable {
  SweepParameter parameter = SweepParameter::kMu;
  std::vector<std::string> labels;
  std::vector<SweepRow> rows;
};

SweepTable sweep(const ExperimentConfig& cfg, SweepParameter parameter,
                 const std::vector<double>& grid, bool with_theory = true);

// "a:b:step" (inclusive, tolerant to rounding) or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace ssaf
