// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cobeam/chanlab.hpp"
#include "cobeam/model.hpp"
#include "cobeam/oracle.hpp"
#include "cobeam/powermin.hpp"
#include "cobeam/wsrm.hpp"

namespace cobeam::experiment {

/// Scenario construction rules.  Weights and the user assignment may be
/// drawn per seed ("the initial user assignment is performed randomly");
/// the random streams are separate from the channel stream and documented
/// in make_scenario.
struct ScenarioSpec {
  int cells = 3;
  int users_per_cell = 2;
  int subcarriers = 4;
  int antennas = 2;
  std::string assignment = "random";    // "random" | "round_robin"
  std::string weight_rule = "uniform";  // "uniform" | "random_range" | "explicit"
  double weight_min = 0.10;
  double weight_max = 0.60;
  std::vector<double> weights;  // per (cell, user), for "explicit"
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  chanlab::GeometryConfig geometry;   // per-run seed overrides geometry.seed
  std::vector<double> power_dbw{20.0};
  wsrm::SpcaConfig spca;
  std::vector<std::uint64_t> seeds{1};
  oracle::GridSpec oracle_grid;
  double oracle_min_ratio = 0.98;
  double roundtrip_target_scale = 1.0;
};

/// Loads the JSON config; unknown keys are rejected so typos fail loudly.
ExperimentConfig load_config(const std::filesystem::path& path);

double dbw_to_watts(double dbw);

/// Deterministic scenario for one (config, seed): weights drawn first, then
/// the assignment, from an mt19937_64 stream decoupled from the channel
/// stream.
Scenario make_scenario(const ExperimentConfig& cfg, double p_max_watts,
                       std::uint64_t seed);

struct SweepRun {
  std::uint64_t seed = 0;
  double power_dbw = 0.0;
  bool failed = false;
  std::string error;
  double wsr = 0.0;
  int iterations = 0;
  wsrm::SpcaStatus status = wsrm::SpcaStatus::IterLimit;
};

struct SweepSummaryRow {
  double power_dbw = 0.0;
  int n_runs = 0;
  int n_failed = 0;
  double mean_wsr = 0.0;
  double std_wsr = 0.0;
};

struct SweepReport {
  std::vector<SweepRun> runs;            // ordered by (power, seed)
  std::vector<SweepSummaryRow> summary;  // one row per sweep power
};

/// Runs chanlab -> spca_solve for every (seed, power) point on a bounded
/// worker pool (cap with COBEAM_WORKERS), writes one trace CSV per point
/// plus runs.csv and summary.csv, and keeps going when single points fail.
SweepReport run_wsrm_sweep(const ExperimentConfig& cfg,
                           const std::filesystem::path& out_dir);

struct RoundtripRun {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  Eigen::VectorXd wsrm_cell_power;
  Eigen::VectorXd min_cell_power;  // from the TotalPower solve
  double wsrm_total_power = 0.0;
  double wsrm_max_cell_power = 0.0;
  powermin::PowerMinStatus total_status =
      powermin::PowerMinStatus::NumericalFailure;
  double min_total_power = 0.0;
  powermin::PowerMinStatus minmax_status =
      powermin::PowerMinStatus::NumericalFailure;
  double minmax_xi = 0.0;
};

struct RoundtripReport {
  std::vector<RoundtripRun> runs;
};

/// WSRM, then power minimization in both objective modes with the achieved
/// SINRs (times roundtrip_target_scale) as targets; emits roundtrip.csv.
RoundtripReport run_roundtrip(const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir);

struct OracleCheckRun {
  std::uint64_t seed = 0;
  double spca_wsr = 0.0;
  double grid_wsr = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct OracleCheckReport {
  std::vector<OracleCheckRun> runs;
  bool all_pass = false;
};

/// Tiny real-channel instances: SPCA final WSR against the grid-search
/// optimum, pass when ratio >= oracle_min_ratio.
OracleCheckReport oracle_check(const ExperimentConfig& cfg);

}  // namespace cobeam::experiment
