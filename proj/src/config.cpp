// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "ssaf/errors.hpp"

namespace ssaf {
namespace {

template <typename E>
E parse_enum(const std::string& name, std::initializer_list<E> values, const char* what) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '-', '_');
  for (E v : values)
    if (to_string(v) == s) return v;
  throw ParameterError(std::string("unknown ") + what + ": " + name);
}

InputSpec input_from_json(const nlohmann::json& j) {
  InputSpec in;
  in.kind = parse_enum(j.value("kind", std::string("ar1")),
                       {InputKind::kWhite, InputKind::kAr1, InputKind::kWavFile}, "input kind");
  in.ar_coefficient = j.value("ar_coefficient", in.kind == InputKind::kWhite ? 0.0 : 0.9);
  in.innovation_variance = j.value("innovation_variance", 1.0);
  in.wav_path = j.value("path", std::string());
  return in;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kSystemId: return "system_id";
    case Scenario::kAec: return "aec";
    case Scenario::kAecDoubleTalk: return "aec_double_talk";
  }
  return "unknown";
}

std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::kSparse: return "sparse";
    case SystemKind::kUniform: return "uniform";
    case SystemKind::kEchoChannel: return "echo_channel";
    case SystemKind::kFile: return "file";
  }
  return "unknown";
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kCg: return "cg";
    case NoiseKind::kAlphaStable: return "alpha_stable";
    case NoiseKind::kNone: return "none";
  }
  return "unknown";
}

std::string to_string(InputKind k) {
  switch (k) {
    case InputKind::kWhite: return "white";
    case InputKind::kAr1: return "ar1";
    case InputKind::kWavFile: return "wav";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (n_subbands == 0) throw ParameterError("n_subbands must be >= 1");
  if (filter_length == 0) throw ParameterError("filter_length must be >= 1");
  if (effective_bank_length() < n_subbands) throw ParameterError("bank_length must be >= N");
  if (trials == 0) throw ParameterError("trials must be >= 1");
  if (samples < filter_length) throw ParameterError("samples must be >= filter_length");
  if (metrics_stride == 0) throw ParameterError("metrics_stride must be >= 1");
  input.validate();
  if (noise.kind == NoiseKind::kCg) {
    if (!noise.snr_db) noise.cg.validate();
    if (!(noise.cg.p_r >= 0.0 && noise.cg.p_r <= 1.0)) throw ParameterError("p_r must lie in [0, 1]");
  } else if (noise.kind == NoiseKind::kAlphaStable) {
    noise.alpha.validate();
  }
  if (system.kind == SystemKind::kSparse &&
      (system.nonzero_count == 0 || system.nonzero_count > filter_length)) {
    throw ParameterError("nonzero_count must lie in [1, M]");
  }
  if (system.kind == SystemKind::kFile && system.path.empty()) {
    throw ParameterError("system kind 'file' needs a path");
  }
  if (scenario == Scenario::kAecDoubleTalk && !double_talk) {
    throw ParameterError("aec_double_talk scenario needs a double_talk section");
  }
  for (const auto& a : algorithms) {
    AlgorithmConfig probe = a;
    // mu_max may be left for the runner to derive.
    if (probe.kind == AlgorithmKind::kVpSIwfSsaf && probe.mu_max <= 0.0) probe.mu_max = 1.0;
    probe.validate(n_subbands, filter_length);
  }
}

AlgorithmConfig algorithm_from_json(const nlohmann::json& j) {
  AlgorithmConfig a;
  a.kind = algorithm_kind_from_string(j.at("kind").get<std::string>());
  a.label = j.value("label", std::string(to_string(a.kind)));
  a.mu = j.value("mu", a.mu);
  a.rho = j.value("rho", a.rho);
  a.chi = j.value("chi", a.chi);
  a.xi = j.value("xi", a.xi);
  a.tau = j.value("tau", a.tau);
  a.mu_min = j.value("mu_min", a.mu_min);
  a.mu_max = j.value("mu_max", a.mu_max);
  a.delta = j.value("delta", a.delta);
  return a;
}

nlohmann::json algorithm_to_json(const AlgorithmConfig& a) {
  return {{"kind", std::string(to_string(a.kind))},
          {"label", a.display_name()},
          {"mu", a.mu},
          {"rho", a.rho},
          {"chi", a.chi},
          {"xi", a.xi},
          {"tau", a.tau},
          {"mu_min", a.mu_min},
          {"mu_max", a.mu_max},
          {"delta", a.delta}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.scenario = parse_enum(j.value("scenario", std::string("system_id")),
                            {Scenario::kSystemId, Scenario::kAec, Scenario::kAecDoubleTalk},
                            "scenario");
    if (j.contains("system")) {
      const auto& s = j.at("system");
      c.system.kind = parse_enum(s.value("kind", std::string("sparse")),
                                 {SystemKind::kSparse, SystemKind::kUniform,
                                  SystemKind::kEchoChannel, SystemKind::kFile},
                                 "system kind");
      c.system.nonzero_count = s.value("nonzero_count", c.system.nonzero_count);
      c.system.normalize_unit_norm = s.value("normalize_unit_norm", false);
      c.system.per_trial = s.value("per_trial", false);
      c.system.path = s.value("path", std::string());
    }
    if (j.contains("input")) c.input = input_from_json(j.at("input"));
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      c.noise.kind = parse_enum(n.value("kind", std::string("cg")),
                                {NoiseKind::kCg, NoiseKind::kAlphaStable, NoiseKind::kNone},
                                "noise kind");
      c.noise.cg.p_r = n.value("p_r", c.noise.cg.p_r);
      c.noise.cg.hbar = n.value("hbar", c.noise.cg.hbar);
      c.noise.cg.sigma_g2 = n.value("sigma_g2", c.noise.cg.sigma_g2);
      if (n.contains("snr_db")) {
        c.noise.snr_db = n.at("snr_db").get<double>();
      } else if (n.contains("sigma_g2")) {
        c.noise.snr_db.reset();
      }
      c.noise.alpha.alpha = n.value("alpha", c.noise.alpha.alpha);
      c.noise.alpha.gamma = n.value("gamma", c.noise.alpha.gamma);
    }
    if (j.contains("algorithms")) {
      for (const auto& a : j.at("algorithms")) c.algorithms.push_back(algorithm_from_json(a));
    }
    c.n_subbands = j.value("n_subbands", c.n_subbands);
    c.bank_length = j.value("bank_length", c.bank_length);
    c.filter_length = j.value("filter_length", c.filter_length);
    c.trials = j.value("trials", c.trials);
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    c.metrics_stride = j.value("metrics_stride", c.metrics_stride);
    c.threads = j.value("threads", c.threads);
    c.start_at_optimum = j.value("start_at_optimum", false);
    if (j.contains("sudden_change") && !j.at("sudden_change").is_null()) {
      const auto& s = j.at("sudden_change");
      c.sudden_change = SuddenChange{s.at("at_sample").get<std::size_t>(),
                                     s.at("shift_taps").get<std::size_t>()};
    }
    if (j.contains("double_talk") && !j.at("double_talk").is_null()) {
      const auto& d = j.at("double_talk");
      c.double_talk = DoubleTalkConfig{d.at("start").get<std::size_t>(),
                                       d.at("length").get<std::size_t>(),
                                       d.value("power_ratio_db", 0.0)};
    }
    if (j.contains("theory")) {
      const auto& t = j.at("theory");
      c.theory.enabled = t.value("enabled", false);
      c.theory.ensemble.trials = t.value("trials", c.theory.ensemble.trials);
      c.theory.ensemble.frames_per_trial =
          t.value("frames_per_trial", c.theory.ensemble.frames_per_trial);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed experiment config: ") + e.what());
  }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = to_string(c.scenario);
  j["system"] = {{"kind", to_string(c.system.kind)},
                 {"nonzero_count", c.system.nonzero_count},
                 {"normalize_unit_norm", c.system.normalize_unit_norm},
                 {"per_trial", c.system.per_trial},
                 {"path", c.system.path}};
  j["input"] = {{"kind", to_string(c.input.kind)},
                {"ar_coefficient", c.input.ar_coefficient},
                {"innovation_variance", c.input.innovation_variance},
                {"path", c.input.wav_path}};
  nlohmann::json n = {{"kind", to_string(c.noise.kind)}};
  if (c.noise.kind == NoiseKind::kCg) {
    n["p_r"] = c.noise.cg.p_r;
    n["hbar"] = c.noise.cg.hbar;
    if (c.noise.snr_db) {
      n["snr_db"] = *c.noise.snr_db;
    } else {
      n["sigma_g2"] = c.noise.cg.sigma_g2;
    }
  } else if (c.noise.kind == NoiseKind::kAlphaStable) {
    n["alpha"] = c.noise.alpha.alpha;
    n["gamma"] = c.noise.alpha.gamma;
  }
  j["noise"] = n;
  j["algorithms"] = nlohmann::json::array();
  for (const auto& a : c.algorithms) j["algorithms"].push_back(algorithm_to_json(a));
  j["n_subbands"] = c.n_subbands;
  j["bank_length"] = c.effective_bank_length();
  j["filter_length"] = c.filter_length;
  j["trials"] = c.trials;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["metrics_stride"] = c.metrics_stride;
  j["start_at_optimum"] = c.start_at_optimum;
  j["threads"] = c.threads;
  if (c.sudden_change) {
    j["sudden_change"] = {{"at_sample", c.sudden_change->at_sample},
                          {"shift_taps", c.sudden_change->shift_taps}};
  }
  if (c.double_talk) {
    j["double_talk"] = {{"start", c.double_talk->start},
                        {"length", c.double_talk->length},
                        {"power_ratio_db", c.double_talk->power_ratio_db}};
  }
  j["theory"] = {{"enabled", c.theory.enabled},
                 {"trials", c.theory.ensemble.trials},
                 {"frames_per_trial", c.theory.ensemble.frames_per_trial}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("config is not valid JSON (" + path.string() + "): " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const ExperimentConfig& cfg) {
  nlohmann::json j = config_to_json(cfg);
  j.erase("threads");
  return hex_digest(fnv1a(j.dump()));
}

}  // namespace ssaf
