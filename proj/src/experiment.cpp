// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cobeam::experiment {

using nlohmann::json;

double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok |= key == k;
    if (!ok) {
      throw ModelError("config: unknown key '" + key + "' in " + where);
    }
  }
}

void parse_scenario(const json& j, ScenarioSpec& s) {
  reject_unknown(j,
                 {"cells", "users_per_cell", "subcarriers", "antennas",
                  "assignment", "weights"},
                 "scenario");
  s.cells = j.value("cells", s.cells);
  s.users_per_cell = j.value("users_per_cell", s.users_per_cell);
  s.subcarriers = j.value("subcarriers", s.subcarriers);
  s.antennas = j.value("antennas", s.antennas);
  s.assignment = j.value("assignment", s.assignment);
  if (j.contains("weights")) {
    const json& w = j["weights"];
    reject_unknown(w, {"rule", "min", "max", "values"}, "scenario.weights");
    s.weight_rule = w.value("rule", s.weight_rule);
    s.weight_min = w.value("min", s.weight_min);
    s.weight_max = w.value("max", s.weight_max);
    if (w.contains("values")) {
      s.weights = w["values"].get<std::vector<double>>();
    }
  }
}

void parse_geometry(const json& j, chanlab::GeometryConfig& g) {
  reject_unknown(j,
                 {"inter_bs_distance_m", "annulus_inner_m", "annulus_outer_m",
                  "pathloss_ref", "pathloss_exp", "shadowing_std_db",
                  "frequency_flat_shadowing", "pathloss_domain", "fading"},
                 "geometry");
  g.inter_bs_distance = j.value("inter_bs_distance_m", g.inter_bs_distance);
  g.annulus_inner = j.value("annulus_inner_m", g.annulus_inner);
  g.annulus_outer = j.value("annulus_outer_m", g.annulus_outer);
  g.pathloss_ref = j.value("pathloss_ref", g.pathloss_ref);
  g.pathloss_exp = j.value("pathloss_exp", g.pathloss_exp);
  g.shadowing_std_db = j.value("shadowing_std_db", g.shadowing_std_db);
  g.frequency_flat_shadowing =
      j.value("frequency_flat_shadowing", g.frequency_flat_shadowing);
  if (j.contains("pathloss_domain")) {
    const std::string d = j["pathloss_domain"];
    if (d == "amplitude") {
      g.pathloss_domain = chanlab::PathlossDomain::Amplitude;
    } else if (d == "power") {
      g.pathloss_domain = chanlab::PathlossDomain::Power;
    } else {
      throw ModelError("config: pathloss_domain must be amplitude|power");
    }
  }
  if (j.contains("fading")) {
    const std::string f = j["fading"];
    if (f == "rayleigh") {
      g.fading = chanlab::Fading::Rayleigh;
    } else if (f == "unit") {
      g.fading = chanlab::Fading::Unit;
    } else if (f == "real_gaussian") {
      g.fading = chanlab::Fading::RealGaussian;
    } else {
      throw ModelError("config: fading must be rayleigh|unit|real_gaussian");
    }
  }
}

void parse_spca(const json& j, wsrm::SpcaConfig& c) {
  reject_unknown(j,
                 {"method", "n_iter_max", "stop_delta", "p_floor",
                  "q_scale_margin", "adaptive_floor", "solver"},
                 "spca");
  if (j.contains("method")) {
    const std::string m = j["method"];
    if (m == "geometric_mean") {
      c.method = wsrm::Method::GeometricMean;
    } else if (m == "hyperbolic_tree") {
      c.method = wsrm::Method::HyperbolicTree;
    } else {
      throw ModelError("config: method must be geometric_mean|hyperbolic_tree");
    }
  }
  c.n_iter_max = j.value("n_iter_max", c.n_iter_max);
  c.stop_delta = j.value("stop_delta", c.stop_delta);
  c.p_floor = j.value("p_floor", c.p_floor);
  c.q_scale_margin = j.value("q_scale_margin", c.q_scale_margin);
  c.adaptive_floor = j.value("adaptive_floor", c.adaptive_floor);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"tol_primal", "tol_dual", "tol_gap", "max_iter"},
                   "spca.solver");
    c.solver.primal = s.value("tol_primal", c.solver.primal);
    c.solver.dual = s.value("tol_dual", c.solver.dual);
    c.solver.gap = s.value("tol_gap", c.solver.gap);
    c.solver.max_iter = s.value("max_iter", c.solver.max_iter);
  }
}

void parse_oracle(const json& j, ExperimentConfig& cfg) {
  reject_unknown(j,
                 {"angle_steps", "power_steps", "refine_rounds", "zoom",
                  "min_ratio"},
                 "oracle");
  cfg.oracle_grid.angle_steps =
      j.value("angle_steps", cfg.oracle_grid.angle_steps);
  cfg.oracle_grid.power_steps =
      j.value("power_steps", cfg.oracle_grid.power_steps);
  cfg.oracle_grid.refine_rounds =
      j.value("refine_rounds", cfg.oracle_grid.refine_rounds);
  cfg.oracle_grid.zoom = j.value("zoom", cfg.oracle_grid.zoom);
  cfg.oracle_min_ratio = j.value("min_ratio", cfg.oracle_min_ratio);
}

int worker_count(std::size_t points) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("COBEAM_WORKERS")) {
    const long v = std::atol(cap);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<int>(std::min<std::size_t>(n, points));
}

/// Writes atomically: temp file in the target directory, then rename.
void write_file(const std::filesystem::path& path, const std::string& body) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw ModelError("cannot write " + tmp.string());
    os << body;
  }
  std::filesystem::rename(tmp, path);
}

std::string format_power(double dbw) {
  std::ostringstream os;
  os << dbw;
  std::string s = os.str();
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ModelError("config: cannot open " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ModelError("config: parse error in " + path.string() + ": " +
                     e.what());
  }
  reject_unknown(j,
                 {"scenario", "geometry", "sweep", "spca", "seeds", "oracle",
                  "roundtrip"},
                 "top level");
  ExperimentConfig cfg;
  if (j.contains("scenario")) parse_scenario(j["scenario"], cfg.scenario);
  if (j.contains("geometry")) parse_geometry(j["geometry"], cfg.geometry);
  if (j.contains("sweep")) {
    reject_unknown(j["sweep"], {"power_dbw"}, "sweep");
    if (j["sweep"].contains("power_dbw")) {
      cfg.power_dbw = j["sweep"]["power_dbw"].get<std::vector<double>>();
    }
  }
  if (j.contains("spca")) parse_spca(j["spca"], cfg.spca);
  if (j.contains("seeds")) {
    cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  }
  if (j.contains("oracle")) parse_oracle(j["oracle"], cfg);
  if (j.contains("roundtrip")) {
    reject_unknown(j["roundtrip"], {"target_scale"}, "roundtrip");
    cfg.roundtrip_target_scale =
        j["roundtrip"].value("target_scale", cfg.roundtrip_target_scale);
  }
  if (cfg.power_dbw.empty() || cfg.seeds.empty()) {
    throw ModelError("config: sweep.power_dbw and seeds must be non-empty");
  }
  cfg.spca.validate();
  cfg.geometry.validate();
  cfg.oracle_grid.validate();
  return cfg;
}

Scenario make_scenario(const ExperimentConfig& cfg, double p_max_watts,
                       std::uint64_t seed) {
  const ScenarioSpec& sp = cfg.scenario;
  // Decouple the scenario stream from the channel stream.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };

  std::vector<double> weights;
  const std::size_t n_weights =
      static_cast<std::size_t>(sp.cells) * sp.users_per_cell;
  if (sp.weight_rule == "uniform") {
    weights.assign(n_weights, 1.0);
  } else if (sp.weight_rule == "random_range") {
    for (std::size_t i = 0; i < n_weights; ++i) {
      weights.push_back(sp.weight_min +
                        uniform() * (sp.weight_max - sp.weight_min));
    }
  } else if (sp.weight_rule == "explicit") {
    if (sp.weights.size() != n_weights) {
      throw ModelError("config: explicit weights must have " +
                       std::to_string(n_weights) + " entries");
    }
    weights = sp.weights;
  } else {
    throw ModelError("config: weight rule must be uniform|random_range|explicit");
  }

  std::vector<int> assignment(static_cast<std::size_t>(sp.cells) *
                              sp.subcarriers);
  if (sp.assignment == "round_robin") {
    for (int m = 0; m < sp.cells; ++m)
      for (int n = 0; n < sp.subcarriers; ++n)
        assignment[static_cast<std::size_t>(m) * sp.subcarriers + n] =
            n % sp.users_per_cell;
  } else if (sp.assignment == "random") {
    for (int m = 0; m < sp.cells; ++m)
      for (int n = 0; n < sp.subcarriers; ++n)
        assignment[static_cast<std::size_t>(m) * sp.subcarriers + n] =
            static_cast<int>(uniform() * sp.users_per_cell) %
            sp.users_per_cell;
  } else {
    throw ModelError("config: assignment must be random|round_robin");
  }

  return Scenario(sp.cells, sp.users_per_cell, sp.subcarriers, sp.antennas,
                  std::vector<double>(sp.cells, p_max_watts),
                  std::move(weights), std::move(assignment));
}

SweepReport run_wsrm_sweep(const ExperimentConfig& cfg,
                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  struct Point {
    double power_dbw;
    std::uint64_t seed;
  };
  std::vector<Point> points;
  for (double p : cfg.power_dbw)
    for (std::uint64_t s : cfg.seeds) points.push_back({p, s});

  SweepReport report;
  report.runs.resize(points.size());

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const Point& pt = points[i];
      SweepRun& run = report.runs[i];
      run.seed = pt.seed;
      run.power_dbw = pt.power_dbw;
      try {
        const double p_watts = dbw_to_watts(pt.power_dbw);
        const Scenario scenario = make_scenario(cfg, p_watts, pt.seed);
        chanlab::GeometryConfig g = cfg.geometry;
        g.seed = pt.seed;
        chanlab::ChannelGenerator gen(g);
        const ChannelSet channels = gen.generate(scenario);
        const wsrm::SpcaResult r =
            wsrm::spca_solve(scenario, channels, cfg.spca);
        run.wsr = r.report.weighted_sum_rate;
        run.iterations = r.iterations();
        run.status = r.status;

        std::ostringstream trace;
        wsrm::write_trace_csv(r.trace, trace);
        write_file(out_dir / ("trace_p" + format_power(pt.power_dbw) + "_s" +
                              std::to_string(pt.seed) + ".csv"),
                   trace.str());
      } catch (const std::exception& e) {
        run.failed = true;
        run.error = e.what();
      }
    }
  };

  const int workers = worker_count(points.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers - 1; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (double p : cfg.power_dbw) {
    SweepSummaryRow row;
    row.power_dbw = p;
    double sum = 0.0, sumsq = 0.0;
    for (const SweepRun& r : report.runs) {
      if (r.power_dbw != p) continue;
      ++row.n_runs;
      if (r.failed) {
        ++row.n_failed;
        continue;
      }
      sum += r.wsr;
      sumsq += r.wsr * r.wsr;
    }
    const int ok = row.n_runs - row.n_failed;
    if (ok > 0) {
      row.mean_wsr = sum / ok;
      row.std_wsr = std::sqrt(std::max(0.0, sumsq / ok - row.mean_wsr * row.mean_wsr));
    }
    report.summary.push_back(row);
  }

  std::ostringstream runs_csv;
  runs_csv << "# cobeam-sweep-runs v1\n";
  runs_csv << "power_dbw,seed,status,iterations,wsr,error\n";
  runs_csv.precision(12);
  for (const SweepRun& r : report.runs) {
    runs_csv << r.power_dbw << ',' << r.seed << ','
             << (r.failed ? "failed" : wsrm::to_string(r.status)) << ','
             << r.iterations << ',' << r.wsr << ',' << r.error << '\n';
  }
  write_file(out_dir / "runs.csv", runs_csv.str());

  std::ostringstream summary_csv;
  summary_csv << "# cobeam-sweep-summary v1\n";
  summary_csv << "power_dbw,n_runs,n_failed,mean_wsr,std_wsr\n";
  summary_csv.precision(12);
  for (const SweepSummaryRow& r : report.summary) {
    summary_csv << r.power_dbw << ',' << r.n_runs << ',' << r.n_failed << ','
                << r.mean_wsr << ',' << r.std_wsr << '\n';
  }
  write_file(out_dir / "summary.csv", summary_csv.str());
  return report;
}

RoundtripReport run_roundtrip(const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RoundtripReport report;
  const double p_watts = dbw_to_watts(cfg.power_dbw.front());

  for (std::uint64_t seed : cfg.seeds) {
    RoundtripRun run;
    run.seed = seed;
    try {
      const Scenario scenario = make_scenario(cfg, p_watts, seed);
      chanlab::GeometryConfig g = cfg.geometry;
      g.seed = seed;
      chanlab::ChannelGenerator gen(g);
      const ChannelSet channels = gen.generate(scenario);
      const wsrm::SpcaResult w = wsrm::spca_solve(scenario, channels, cfg.spca);
      run.wsrm_cell_power = w.report.per_cell_power;
      run.wsrm_total_power = w.report.per_cell_power.sum();
      run.wsrm_max_cell_power = w.report.per_cell_power.maxCoeff();

      powermin::SinrTargets targets =
          powermin::SinrTargets::from_report(w.report);
      targets.gamma *= cfg.roundtrip_target_scale;

      const powermin::PowerMinResult total = powermin::solve_powermin(
          scenario, channels, targets, powermin::ObjectiveMode::TotalPower);
      run.total_status = total.status;
      if (total.ok()) {
        run.min_total_power = total.total_power;
        run.min_cell_power = total.per_cell_power;
      }

      const powermin::PowerMinResult minmax = powermin::solve_powermin(
          scenario, channels, targets,
          powermin::ObjectiveMode::MinMaxCellPower);
      run.minmax_status = minmax.status;
      if (minmax.ok()) run.minmax_xi = minmax.objective;
    } catch (const std::exception& e) {
      run.failed = true;
      run.error = e.what();
    }
    report.runs.push_back(std::move(run));
  }

  std::ostringstream csv;
  csv << "# cobeam-roundtrip v1\n";
  csv << "seed,wsrm_total_power,wsrm_max_cell_power,total_status,"
         "min_total_power,minmax_status,minmax_xi";
  for (int m = 0; m < cfg.scenario.cells; ++m) {
    csv << ",wsrm_power_cell" << m << ",min_power_cell" << m;
  }
  csv << ",error\n";
  csv.precision(12);
  for (const RoundtripRun& r : report.runs) {
    csv << r.seed << ',' << r.wsrm_total_power << ',' << r.wsrm_max_cell_power
        << ',' << powermin::to_string(r.total_status) << ','
        << r.min_total_power << ',' << powermin::to_string(r.minmax_status)
        << ',' << r.minmax_xi;
    for (int m = 0; m < cfg.scenario.cells; ++m) {
      csv << ',' << (r.wsrm_cell_power.size() > m ? r.wsrm_cell_power[m] : 0.0)
          << ',' << (r.min_cell_power.size() > m ? r.min_cell_power[m] : 0.0);
    }
    csv << ',' << r.error << '\n';
  }
  write_file(out_dir / "roundtrip.csv", csv.str());
  return report;
}

OracleCheckReport oracle_check(const ExperimentConfig& cfg) {
  if (cfg.scenario.cells > 2 || cfg.scenario.subcarriers != 1 ||
      cfg.scenario.antennas != 2) {
    throw ModelError(
        "oracle_check: scenario must be <= 2 cells, 1 subcarrier, 2 antennas");
  }
  OracleCheckReport report;
  report.all_pass = true;
  const double p_watts = dbw_to_watts(cfg.power_dbw.front());
  for (std::uint64_t seed : cfg.seeds) {
    OracleCheckRun run;
    run.seed = seed;
    const Scenario scenario = make_scenario(cfg, p_watts, seed);
    chanlab::GeometryConfig g = cfg.geometry;
    g.seed = seed;
    g.fading = chanlab::Fading::RealGaussian;  // oracle needs real channels
    chanlab::ChannelGenerator gen(g);
    const ChannelSet channels = gen.generate(scenario);
    run.spca_wsr =
        wsrm::spca_solve(scenario, channels, cfg.spca).report.weighted_sum_rate;
    run.grid_wsr = oracle::grid_wsrm(scenario, channels, cfg.oracle_grid).wsr;
    run.ratio = run.grid_wsr > 0.0 ? run.spca_wsr / run.grid_wsr : 1.0;
    run.pass = run.ratio >= cfg.oracle_min_ratio;
    report.all_pass &= run.pass;
    report.runs.push_back(run);
  }
  return report;
}

}  // namespace cobeam::experiment
