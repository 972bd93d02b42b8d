// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Experiment configuration and its JSON form.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssaf/adaptive.hpp"
#include "ssaf/signal.hpp"
#include "ssaf/theory.hpp"

namespace ssaf {

enum class Scenario { kSystemId, kAec, kAecDoubleTalk };

enum class SystemKind {
  kSparse,       // |NZ| Gaussian taps at random positions
  kUniform,      // dense U[-0.5, 0.5] taps
  kEchoChannel,  // synthetic room echo path
  kFile,         // JSON array of taps
};

struct SystemConfig {
  SystemKind kind = SystemKind::kSparse;
  std::size_t nonzero_count = 4;
  bool normalize_unit_norm = false;
  bool per_trial = false;  // redraw w_opt in every trial
  std::string path;
};

// kNone leaves d(n) noise-free; it is meant for sanity runs.
enum class NoiseKind { kCg, kAlphaStable, kNone };

struct NoiseConfig {
  NoiseKind kind = NoiseKind::kCg;
  CgNoiseSpec cg;
  // When set, cg.sigma_g2 is calibrated from this SNR against the clean
  // system output.
  std::optional<double> snr_db = 30.0;
  AlphaStableSpec alpha;
};

// At `at_sample` every tap of w_opt moves `shift_taps` positions to the right;
// vacated leading taps are zero and taps pushed past M are dropped.
struct SuddenChange {
  std::size_t at_sample = 0;
  std::size_t shift_taps = 0;
};

// Speech-like near-end burst added to d(n) on [start, start + length).
struct DoubleTalkConfig {
  std::size_t start = 0;
  std::size_t length = 0;
  double power_ratio_db = 0.0;  // near-end power relative to echo power
};

struct TheoryConfig {
  bool enabled = false;
  EnsembleOptions ensemble;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kSystemId;
  SystemConfig system;
  InputSpec input;
  NoiseConfig noise;
  std::vector<AlgorithmConfig> algorithms;
  std::size_t n_subbands = 4;
  std::size_t bank_length = 0;  // 0 means 8N
  std::size_t filter_length = 32;
  std::size_t trials = 50;
  std::size_t samples = 40000;
  std::uint64_t seed = 1;
  std::optional<SuddenChange> sudden_change;
  std::optional<DoubleTalkConfig> double_talk;
  std::size_t metrics_stride = 1;
  bool start_at_optimum = false;  // w(0) = w_opt instead of 0
  std::size_t threads = 0;  // 0 means hardware concurrency; not part of the digest
  TheoryConfig theory;

  std::size_t effective_bank_length() const { return bank_length == 0 ? 8 * n_subbands : bank_length; }
  std::size_t frame_count() const { return (samples + n_subbands - 1) / n_subbands; }
  void validate() const;
};

std::string to_string(Scenario s);
std::string to_string(SystemKind k);
std::string to_string(NoiseKind k);
std::string to_string(InputKind k);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

AlgorithmConfig algorithm_from_json(const nlohmann::json& j);
nlohmann::json algorithm_to_json(const AlgorithmConfig& a);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex_digest(std::uint64_t h);
// Digest of the canonical JSON form, excluding the thread count.
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace ssaf
