// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/powermin.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace cobeam::powermin {

using conic::LinExpr;
using conic::VarId;

const char* to_string(PowerMinStatus s) {
  switch (s) {
    case PowerMinStatus::Optimal: return "Optimal";
    case PowerMinStatus::Infeasible: return "Infeasible";
    case PowerMinStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

void SinrTargets::validate(const Scenario& scenario) const {
  if (gamma.size() != scenario.n_links()) {
    throw ModelError("powermin: need one SINR target per link, got " +
                     std::to_string(gamma.size()) + " for " +
                     std::to_string(scenario.n_links()));
  }
  for (int j = 0; j < gamma.size(); ++j) {
    if (!(gamma[j] > 0.0) || !std::isfinite(gamma[j])) {
      throw ModelError("powermin: target for link " + std::to_string(j) +
                       " must be finite and positive");
    }
  }
}

SinrTargets SinrTargets::from_report(const RateReport& report,
                                     double min_target) {
  SinrTargets t;
  t.gamma = report.sinr.cwiseMax(min_target);
  return t;
}

PowerMinProgram build_powermin(const Scenario& scenario,
                               const ChannelSet& channels,
                               const SinrTargets& targets,
                               ObjectiveMode mode) {
  targets.validate(scenario);
  const int J = scenario.n_links();

  PowerMinProgram pp;
  pp.mode = mode;
  conic::Program& prog = pp.prog;
  pp.f.resize(J);
  for (int j = 0; j < J; ++j) {
    for (int t = 0; t < scenario.n_tx(); ++t) {
      pp.f[j].re.push_back(
          prog.add_var("f" + std::to_string(j) + ".re" + std::to_string(t)));
    }
    for (int t = 0; t < scenario.n_tx(); ++t) {
      pp.f[j].im.push_back(
          prog.add_var("f" + std::to_string(j) + ".im" + std::to_string(t)));
    }
  }

  for (int j = 0; j < J; ++j) {
    const LinkRef l = scenario.link(j);
    auto [hf_re, hf_im] =
        conic::lift_complex(channels.link_channel(l, l.cell), pp.f[j]);
    // C1: restrict to beamformers with real own-link product.
    prog.add_equality(hf_im);

    // C2: sqrt(1/Gamma) h f >= ||[1, interferer products]||.
    std::vector<LinExpr> tail;
    tail.emplace_back(1.0);
    for (int mi = 0; mi < scenario.n_cells(); ++mi) {
      if (mi == l.cell) continue;
      const int ji = scenario.link_index(mi, l.sub);
      auto [cross_re, cross_im] =
          conic::lift_complex(channels.link_channel(l, mi), pp.f[ji]);
      tail.push_back(std::move(cross_re));
      tail.push_back(std::move(cross_im));
    }
    prog.add_soc(std::sqrt(1.0 / targets.gamma[j]) * hf_re, std::move(tail));
  }

  auto cell_vec = [&](int m) {
    std::vector<LinExpr> tail;
    tail.reserve(2 * scenario.n_tx() * scenario.n_sub());
    for (int n = 0; n < scenario.n_sub(); ++n) {
      const int j = scenario.link_index(m, n);
      for (VarId v : pp.f[j].re) tail.emplace_back(v);
      for (VarId v : pp.f[j].im) tail.emplace_back(v);
    }
    return tail;
  };

  if (mode == ObjectiveMode::TotalPower) {
    LinExpr total;
    for (int m = 0; m < scenario.n_cells(); ++m) {
      const VarId s = prog.add_var("s" + std::to_string(m));
      const VarId t = prog.add_var("t" + std::to_string(m));
      prog.add_soc(LinExpr(s), cell_vec(m));
      // s_m^2 <= t_m so t_m is the cell's power at the optimum.
      prog.add_hyperbolic(LinExpr(s), LinExpr(t), LinExpr(1.0));
      pp.cell_power.push_back(t);
      total += LinExpr(t);
    }
    prog.maximize(-1.0 * total);
  } else {
    pp.xi = prog.add_var("xi");
    for (int m = 0; m < scenario.n_cells(); ++m) {
      prog.add_soc(LinExpr(pp.xi), cell_vec(m));
    }
    prog.maximize(-1.0 * LinExpr(pp.xi));
  }
  return pp;
}

PowerMinResult solve_powermin(const Scenario& scenario,
                              const ChannelSet& channels,
                              const SinrTargets& targets, ObjectiveMode mode,
                              const conic::SolveTolerances& tol) {
  PowerMinProgram pp = build_powermin(scenario, channels, targets, mode);
  const conic::SolveResult res = conic::solve(pp.prog, tol);

  PowerMinResult out;
  if (res.status == conic::SolveStatus::PrimalInfeasible) {
    out.status = PowerMinStatus::Infeasible;
    return out;
  }
  // Iterates that stalled just short of the requested tolerances are still
  // candidates; the SINR postcondition below decides.
  const bool near = res.primal_residual <= 10.0 * tol.primal &&
                    res.dual_residual <= 10.0 * tol.dual &&
                    (res.duality_gap <= 10.0 * tol.gap ||
                     res.relative_gap <= 10.0 * tol.gap);
  if (!res.ok() && !(near && res.status != conic::SolveStatus::DualInfeasible)) {
    out.status = PowerMinStatus::NumericalFailure;
    return out;
  }

  BeamformerSet beams(scenario);
  for (int j = 0; j < scenario.n_links(); ++j) {
    Eigen::VectorXcd f(scenario.n_tx());
    for (int t = 0; t < scenario.n_tx(); ++t) {
      f[t] = cplx(res.value(pp.f[j].re[t]), res.value(pp.f[j].im[t]));
    }
    beams.f(j) = std::move(f);
  }
  for (int j = 0; j < scenario.n_links(); ++j) {
    const double achieved = compute_sinr(scenario, channels, beams, j);
    if (achieved < targets.gamma[j] - 1e-6) {
      out.status = PowerMinStatus::NumericalFailure;
      return out;
    }
  }
  out.status = PowerMinStatus::Optimal;
  out.per_cell_power = beams.per_cell_power(scenario);
  out.total_power = out.per_cell_power.sum();
  out.beams = std::move(beams);
  out.objective = mode == ObjectiveMode::TotalPower ? out.total_power
                                                    : res.value(pp.xi);
  return out;
}

void write_powermin_csv(const Scenario& scenario, const ChannelSet& channels,
                        const SinrTargets& targets,
                        const PowerMinResult& result, std::ostream& os) {
  os << "# cobeam-powermin v1\n";
  os << "link,cell,subcarrier,target,achieved_sinr,cell_power,status\n";
  os.precision(12);
  for (int j = 0; j < scenario.n_links(); ++j) {
    const LinkRef l = scenario.link(j);
    os << j << ',' << l.cell << ',' << l.sub << ',' << targets.gamma[j] << ',';
    if (result.ok()) {
      os << compute_sinr(scenario, channels, result.beams, j) << ','
         << result.per_cell_power[l.cell];
    } else {
      os << "nan,nan";
    }
    os << ',' << to_string(result.status) << '\n';
  }
}

}  // namespace cobeam::powermin
