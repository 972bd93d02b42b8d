// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The SSAF Project Authors

// Command-line front end: run, sweep, theory and compare.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssaf/emit.hpp"
#include "ssaf/errors.hpp"
#include "ssaf/experiment.hpp"
#include "ssaf/theory.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out_dir;
};

void add_common(CLI::App* cmd, std::string& config, Overrides& o) {
  cmd->add_option("config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--trials", o.trials, "override the trial count");
  cmd->add_option("--seed", o.seed, "override the master seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out", o.out_dir, "output directory (default: $SSAF_OUTPUT_DIR or .)");
}

ssaf::ExperimentConfig load(const std::string& path, const Overrides& o) {
  ssaf::ExperimentConfig cfg = ssaf::load_config(path);
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

fs::path output_dir(const Overrides& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("SSAF_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

std::string stem(const std::string& config) { return fs::path(config).stem().string(); }

void print_summary(const ssaf::RunResult& r) {
  const bool nmsd = r.scenario != ssaf::Scenario::kSystemId;
  std::printf("%-28s %14s %10s\n", "algorithm", nmsd ? "steady NMSD dB" : "steady MSD dB",
              "diverged");
  for (const auto& s : r.series) {
    std::printf("%-28s %14.3f %6zu/%zu\n", s.label.c_str(),
                nmsd ? s.steady_state_nmsd_db : s.steady_state_msd_db, s.diverged_trials,
                r.trials);
  }
  std::printf("wall time %.1f s\n", r.wall_seconds);
}

int cmd_run(const std::string& config, const Overrides& o, bool theory) {
  ssaf::ExperimentConfig cfg = load(config, o);
  if (theory) cfg.theory.enabled = true;
  const ssaf::RunResult r = ssaf::run_experiment(cfg);
  const fs::path dir = output_dir(o);
  ssaf::write_csv(r, dir / (stem(config) + ".csv"));
  ssaf::write_json(r, dir / (stem(config) + ".json"));
  print_summary(r);
  return 0;
}

int cmd_compare(const std::string& config, const Overrides& o) {
  const ssaf::ExperimentConfig cfg = load(config, o);
  const ssaf::RunResult r = ssaf::run_experiment(cfg);
  const fs::path dir = output_dir(o);
  ssaf::write_csv(r, dir / (stem(config) + ".csv"));
  ssaf::write_json(r, dir / (stem(config) + ".json"));
  const bool nmsd = r.scenario != ssaf::Scenario::kSystemId;
  std::vector<const ssaf::AlgorithmSeries*> order;
  for (const auto& s : r.series) order.push_back(&s);
  auto value = [nmsd](const ssaf::AlgorithmSeries* s) {
    return nmsd ? s->steady_state_nmsd_db : s->steady_state_msd_db;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](auto* a, auto* b) { return value(a) < value(b); });
  std::printf("rank  %-28s %10s %10s\n", "algorithm", "dB", "vs best");
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::printf("%4zu  %-28s %10.3f %+10.3f\n", i + 1, order[i]->label.c_str(), value(order[i]),
                value(order[i]) - value(order[0]));
  }
  return 0;
}

int cmd_sweep(const std::string& config, const Overrides& o, const std::string& param,
              const std::string& grid, bool no_theory) {
  const ssaf::ExperimentConfig cfg = load(config, o);
  const ssaf::SweepParameter p = ssaf::sweep_parameter_from_string(param);
  const ssaf::SweepTable table = ssaf::sweep(cfg, p, ssaf::parse_grid(grid), !no_theory);
  const fs::path path = output_dir(o) / (stem(config) + "_sweep_" + ssaf::to_string(p) + ".csv");
  ssaf::write_sweep_csv(table, path);
  ssaf::write_sweep_csv(table, std::cout);
  return 0;
}

int cmd_theory(const std::string& config, const Overrides& o, const std::string& algo) {
  const ssaf::ExperimentConfig cfg = load(config, o);
  const ssaf::AlgorithmConfig* chosen = nullptr;
  for (const auto& a : cfg.algorithms) {
    if (a.display_name() == algo) chosen = &a;
  }
  if (!chosen) {
    const ssaf::AlgorithmKind kind = ssaf::algorithm_kind_from_string(algo);
    for (const auto& a : cfg.algorithms)
      if (a.kind == kind && !chosen) chosen = &a;
  }
  if (!chosen) throw ssaf::ParameterError("no algorithm '" + algo + "' in the config");

  const ssaf::TheorySeries series = ssaf::theory_overlay(cfg, *chosen);
  const ssaf::TheoryModel model = ssaf::theory_model_for(cfg, chosen->xi);
  const double rho = chosen->kind == ssaf::AlgorithmKind::kSIwfSsaf ? chosen->rho : 0.0;

  nlohmann::json summary;
  summary["algorithm"] = chosen->display_name();
  summary["mu"] = chosen->mu;
  summary["rho"] = rho;
  summary["stability_bound"] = ssaf::stability_upper_bound(model, false);
  summary["stability_bound_impulse_term"] = ssaf::stability_upper_bound(model, true);
  try {
    summary["steady_state_msd_db"] = ssaf::to_db(ssaf::steady_state_msd(model, chosen->mu, rho).msd);
    const ssaf::SteadyStateResult plain = ssaf::steady_state_msd(model, chosen->mu, 0.0);
    const auto moments = ssaf::phi_moments(plain.state, model.w_opt);
    const std::vector<double> w(model.w_opt.data(), model.w_opt.data() + model.w_opt.size());
    const ssaf::RhoUpperBound rb = ssaf::rho_upper_bound(moments, w, chosen->xi);
    summary["rho_up"] = rb.rho_up;
    summary["rho_up_feasible"] = rb.feasible;
  } catch (const std::runtime_error& e) {
    summary["steady_state_error"] = e.what();
  }

  const fs::path dir = output_dir(o);
  const std::string base = stem(config) + "_theory_" + chosen->display_name();
  ssaf::write_theory_csv(series.msd_db, dir / (base + ".csv"));
  std::ofstream(dir / (base + ".json")) << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign subband adaptive filter experiments"};
  app.require_subcommand(1);

  std::string config;
  Overrides o;

  bool run_theory = false;
  CLI::App* run = app.add_subcommand("run", "run the Monte-Carlo ensemble, emit CSV and JSON");
  add_common(run, config, o);
  run->add_flag("--theory", run_theory, "add theory overlay columns");

  std::string param = "mu";
  std::string grid;
  bool no_theory = false;
  CLI::App* sw = app.add_subcommand("sweep", "steady-state MSD over a parameter grid");
  add_common(sw, config, o);
  sw->add_option("--param", param, "mu, rho, N, M, p_r or snr");
  sw->add_option("--grid", grid, "lo:hi:step or a comma-separated list")->required();
  sw->add_flag("--no-theory", no_theory, "skip the theory column");

  std::string algo = "iwf_ssaf";
  CLI::App* th = app.add_subcommand("theory", "theoretical MSD trajectory and steady-state summary");
  add_common(th, config, o);
  th->add_option("--algo", algo, "algorithm label or kind");

  CLI::App* cmp = app.add_subcommand("compare", "rank the configured algorithms");
  add_common(cmp, config, o);

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(output_dir(o));
    if (run->parsed()) return cmd_run(config, o, run_theory);
    if (sw->parsed()) return cmd_sweep(config, o, param, grid, no_theory);
    if (th->parsed()) return cmd_theory(config, o, algo);
    if (cmp->parsed()) return cmd_compare(config, o);
  } catch (const ssaf::ParameterError& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
