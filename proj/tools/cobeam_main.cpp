// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cobeam/experiment.hpp"

namespace {

using namespace cobeam;

int cmd_wsrm_sweep(const std::string& config, const std::string& out) {
  const experiment::ExperimentConfig cfg = experiment::load_config(config);
  const experiment::SweepReport report = experiment::run_wsrm_sweep(cfg, out);
  int failures = 0;
  for (const auto& row : report.summary) {
    std::printf("P = %6.2f dBW: %d runs, %d failed, mean WSR %.4f (std %.4f)\n",
                row.power_dbw, row.n_runs, row.n_failed, row.mean_wsr,
                row.std_wsr);
    failures += row.n_failed;
  }
  for (const auto& run : report.runs) {
    if (run.failed) {
      std::fprintf(stderr, "  seed %llu @ %g dBW failed: %s\n",
                   static_cast<unsigned long long>(run.seed), run.power_dbw,
                   run.error.c_str());
    }
  }
  std::printf("outputs in %s\n", out.c_str());
  return failures == 0 ? 0 : 1;
}

int cmd_roundtrip(const std::string& config, const std::string& out) {
  const experiment::ExperimentConfig cfg = experiment::load_config(config);
  const experiment::RoundtripReport report =
      experiment::run_roundtrip(cfg, out);
  int failures = 0;
  for (const auto& run : report.runs) {
    if (run.failed) {
      ++failures;
      std::fprintf(stderr, "seed %llu failed: %s\n",
                   static_cast<unsigned long long>(run.seed),
                   run.error.c_str());
      continue;
    }
    std::printf("seed %llu: WSRM power %.4f, min power %.4f (%s), xi %.4f (%s)\n",
                static_cast<unsigned long long>(run.seed),
                run.wsrm_total_power, run.min_total_power,
                powermin::to_string(run.total_status), run.minmax_xi,
                powermin::to_string(run.minmax_status));
    if (run.total_status == powermin::PowerMinStatus::Optimal &&
        run.min_total_power > run.wsrm_total_power + 1e-6) {
      std::fprintf(stderr, "seed %llu: min power exceeds WSRM power\n",
                   static_cast<unsigned long long>(run.seed));
      ++failures;
    }
    if (run.total_status == powermin::PowerMinStatus::NumericalFailure ||
        run.minmax_status == powermin::PowerMinStatus::NumericalFailure) {
      ++failures;
    }
  }
  std::printf("outputs in %s\n", out.c_str());
  return failures == 0 ? 0 : 1;
}

int cmd_oracle_check(const std::string& config) {
  const experiment::ExperimentConfig cfg = experiment::load_config(config);
  const experiment::OracleCheckReport report = experiment::oracle_check(cfg);
  for (const auto& run : report.runs) {
    std::printf("seed %llu: spca %.6f vs grid %.6f, ratio %.4f [%s]\n",
                static_cast<unsigned long long>(run.seed), run.spca_wsr,
                run.grid_wsr, run.ratio, run.pass ? "ok" : "FAIL");
  }
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated multicell beamforming experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";

  CLI::App* sweep =
      app.add_subcommand("wsrm-sweep", "weighted sum-rate power sweep");
  sweep->add_option("--config", config, "experiment config (json)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output directory");

  CLI::App* roundtrip = app.add_subcommand(
      "roundtrip", "WSRM then power minimization on the achieved SINRs");
  roundtrip->add_option("--config", config, "experiment config (json)")
      ->required()
      ->check(CLI::ExistingFile);
  roundtrip->add_option("--out", out, "output directory");

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "SPCA against the exhaustive grid on tiny instances");
  oracle->add_option("--config", config, "experiment config (json)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return cmd_wsrm_sweep(config, out);
    if (roundtrip->parsed()) return cmd_roundtrip(config, out);
    if (oracle->parsed()) return cmd_oracle_check(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
