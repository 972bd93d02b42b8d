// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// CSV and JSON output for runs, sweeps and theory trajectories.

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssaf/experiment.hpp"

namespace ssaf {

// Columns: k, one dB column per algorithm (MSD for system identification,
// NMSD for echo cancellation), then theory_<label> columns. Values use
// "%.10g"; an empty result gives a header-only file.
void write_csv(const RunResult& result, std::ostream& out);
void write_csv(const RunResult& result, const std::filesystem::path& path);

// Digest of every emitted series value and divergence flag.
std::string result_digest(const RunResult& result);

struct AlgorithmSummary {
  std::string label;
  double steady_state_msd_db = 0.0;
  double steady_state_nmsd_db = 0.0;
  std::size_t diverged_trials = 0;
  bool all_diverged = false;
  std::size_t step_size_increases = 0;

  bool operator==(const AlgorithmSummary&) const = default;
};

struct RunSummary {
  std::string scenario;
  std::string config_digest;
  std::string result_digest;
  std::size_t trials = 0;
  std::size_t frames = 0;
  double reference_norm2 = 0.0;
  std::vector<AlgorithmSummary> algorithms;
  double wall_seconds = 0.0;

  bool operator==(const RunSummary&) const = default;
};

RunSummary summarize(const RunResult& result);
nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);
void write_json(const RunResult& result, const std::filesystem::path& path);
RunSummary read_summary_json(const std::filesystem::path& path);

// Columns: <parameter>, one steady-state dB column per algorithm, then
// theory_<label> columns.
void write_sweep_csv(const SweepTable& table, std::ostream& out);
void write_sweep_csv(const SweepTable& table, const std::filesystem::path& path);

// Columns: k, msd_db.
void write_theory_csv(const std::vector<double>& msd_db, std::ostream& out);
void write_theory_csv(const std::vector<double>& msd_db, const std::filesystem::path& path);

std::string format_number(double x);

}  // namespace ssaf
