// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

#include "ssaf/emit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ssaf/errors.hpp"

namespace ssaf {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write " + path.string());
  return out;
}

const std::vector<double>& emitted(const RunResult& r, const AlgorithmSeries& s) {
  return r.scenario == Scenario::kSystemId ? s.msd_db : s.nmsd_db;
}

// JSON has no NaN or infinity; they are written as null.
nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_csv(const RunResult& result, std::ostream& out) {
  out << "k";
  for (const auto& s : result.series) out << ',' << s.label;
  for (const auto& t : result.theory) out << ",theory_" << t.label;
  out << '\n';
  if (result.empty()) return;
  const std::vector<std::size_t> idx = result.row_index();
  // Theory columns follow the same normalization as the simulated ones.
  const double ref =
      result.scenario == Scenario::kSystemId ? 0.0 : 10.0 * std::log10(result.reference_norm2);
  for (std::size_t row = 0; row < idx.size(); ++row) {
    out << idx[row];
    for (const auto& s : result.series) out << ',' << format_number(emitted(result, s)[row]);
    for (const auto& t : result.theory) out << ',' << format_number(t.msd_db[row] - ref);
    out << '\n';
  }
}

void write_csv(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  write_csv(result, out);
}

std::string result_digest(const RunResult& result) {
  std::uint64_t h = fnv1a(result.config_digest);
  auto mix = [&h](const void* p, std::size_t n) {
    h = fnv1a(std::string_view(static_cast<const char*>(p), n), h);
  };
  for (const auto& s : result.series) {
    h = fnv1a(s.label, h);
    mix(s.msd.data(), s.msd.size() * sizeof(double));
    mix(&s.diverged_trials, sizeof s.diverged_trials);
  }
  for (const auto& t : result.theory) mix(t.msd_db.data(), t.msd_db.size() * sizeof(double));
  return hex_digest(h);
}

RunSummary summarize(const RunResult& r) {
  RunSummary s;
  s.scenario = to_string(r.scenario);
  s.config_digest = r.config_digest;
  s.result_digest = result_digest(r);
  s.trials = r.trials;
  s.frames = r.frames;
  s.reference_norm2 = r.reference_norm2;
  s.wall_seconds = r.wall_seconds;
  for (const auto& a : r.series) {
    s.algorithms.push_back({a.label, a.steady_state_msd_db, a.steady_state_nmsd_db,
                            a.diverged_trials, a.all_diverged, a.step_size_increases});
  }
  return s;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["scenario"] = s.scenario;
  j["config_digest"] = s.config_digest;
  j["result_digest"] = s.result_digest;
  j["trials"] = s.trials;
  j["frames"] = s.frames;
  j["reference_norm2"] = s.reference_norm2;
  j["wall_seconds"] = s.wall_seconds;
  j["algorithms"] = nlohmann::json::array();
  for (const auto& a : s.algorithms) {
    j["algorithms"].push_back({{"label", a.label},
                               {"steady_state_msd_db", number_or_null(a.steady_state_msd_db)},
                               {"steady_state_nmsd_db", number_or_null(a.steady_state_nmsd_db)},
                               {"diverged_trials", a.diverged_trials},
                               {"all_diverged", a.all_diverged},
                               {"step_size_increases", a.step_size_increases}});
  }
  return j;
}

RunSummary summary_from_json(const nlohmann::json& j) {
  try {
    RunSummary s;
    s.scenario = j.at("scenario").get<std::string>();
    s.config_digest = j.at("config_digest").get<std::string>();
    s.result_digest = j.at("result_digest").get<std::string>();
    s.trials = j.at("trials").get<std::size_t>();
    s.frames = j.at("frames").get<std::size_t>();
    s.reference_norm2 = j.at("reference_norm2").get<double>();
    s.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& a : j.at("algorithms")) {
      s.algorithms.push_back({a.at("label").get<std::string>(),
                              number_from(a.at("steady_state_msd_db")),
                              number_from(a.at("steady_state_nmsd_db")),
                              a.at("diverged_trials").get<std::size_t>(),
                              a.at("all_diverged").get<bool>(),
                              a.at("step_size_increases").get<std::size_t>()});
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed run summary: ") + e.what());
  }
}

void write_json(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << summary_to_json(summarize(result)).dump(2) << '\n';
}

RunSummary read_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("summary is not valid JSON: " + std::string(e.what()));
  }
  return summary_from_json(j);
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  out << to_string(table.parameter);
  for (const auto& l : table.labels) out << ',' << l;
  for (const auto& l : table.labels) out << ",theory_" << l;
  out << '\n';
  for (const auto& row : table.rows) {
    out << format_number(row.value);
    for (double x : row.steady_state_msd_db) out << ',' << format_number(x);
    for (double x : row.theory_msd_db) out << ',' << format_number(x);
    out << '\n';
  }
}

void write_sweep_csv(const SweepTable& table, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  write_sweep_csv(table, out);
}

void write_theory_csv(const std::vector<double>& msd_db, std::ostream& out) {
  out << "k,msd_db\n";
  for (std::size_t k = 0; k < msd_db.size(); ++k) out << k << ',' << format_number(msd_db[k]) << '\n';
}

void write_theory_csv(const std::vector<double>& msd_db, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  write_theory_csv(msd_db, out);
}

}  // namespace ssaf
