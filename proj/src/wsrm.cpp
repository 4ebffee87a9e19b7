// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/wsrm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace cobeam::wsrm {

using conic::LinExpr;
using conic::VarId;

const char* to_string(Method m) {
  return m == Method::GeometricMean ? "geometric_mean" : "hyperbolic_tree";
}

const char* to_string(SpcaStatus s) {
  switch (s) {
    case SpcaStatus::Converged: return "converged";
    case SpcaStatus::IterLimit: return "iter_limit";
    case SpcaStatus::SolverStalled: return "solver_stalled";
  }
  return "unknown";
}

void SpcaConfig::validate() const {
  if (n_iter_max < 1) throw ModelError("spca: n_iter_max must be >= 1");
  if (!(stop_delta > 0.0)) throw ModelError("spca: stop_delta must be > 0");
  if (!(p_floor > 0.0)) throw ModelError("spca: p_floor must be > 0");
  if (!(q_scale_margin > 1.0)) {
    throw ModelError("spca: q_scale_margin must exceed 1");
  }
}

Exponents scale_exponents(const Scenario& scenario, double q_scale_margin) {
  const int J = scenario.n_links();
  double min_positive = std::numeric_limits<double>::infinity();
  for (int j = 0; j < J; ++j) {
    const double w = scenario.link_weight(j);
    if (w > 0.0) min_positive = std::min(min_positive, w);
  }
  if (!std::isfinite(min_positive)) {
    throw ModelError("scale_exponents: all link weights are zero");
  }
  const double kappa = q_scale_margin / min_positive;
  Exponents e;
  e.alpha = Eigen::VectorXd::Zero(J);
  e.q = Eigen::VectorXd::Zero(J);
  for (int j = 0; j < J; ++j) {
    const double w = scenario.link_weight(j);
    if (w > 0.0) {
      e.alpha[j] = kappa * w;
      e.q[j] = 1.0 / e.alpha[j];
      e.active.push_back(j);
    }
  }
  return e;
}

namespace {

/// Plain h*f for fixed complex vectors.
cplx dotu(const Eigen::RowVectorXcd& h, const Eigen::VectorXcd& f) {
  return (h * f).value();
}

double interference_power(const Scenario& s, const ChannelSet& channels,
                          const BeamformerSet& beams, int j) {
  const LinkRef l = s.link(j);
  double acc = 0.0;
  for (int mi = 0; mi < s.n_cells(); ++mi) {
    if (mi == l.cell) continue;
    acc += std::norm(dotu(channels.link_channel(l, mi),
                          beams.f(s.link_index(mi, l.sub))));
  }
  return acc;
}

double surrogate_upper(double zeta, double p, double theta) {
  return 0.5 * (p / theta + theta * zeta * zeta);
}

}  // namespace

std::pair<BeamformerSet, SpcaState> init_theta(const Scenario& scenario,
                                               const ChannelSet& channels,
                                               const SpcaConfig& config) {
  config.validate();
  const int J = scenario.n_links();
  BeamformerSet beams(scenario);

  // Step 1: channel-matched beamformers meeting the per-cell budget with
  // equality (N_sub beams of power P/N_sub each).
  for (int j = 0; j < J; ++j) {
    const LinkRef l = scenario.link(j);
    const Eigen::RowVectorXcd& h = channels.link_channel(l, l.cell);
    const double norm = h.norm();
    if (!(norm > 0.0)) {
      throw ModelError("init_theta: zero channel on link " + std::to_string(j) +
                       ", cannot match");
    }
    beams.f(j) =
        std::sqrt(scenario.p_max(l.cell) / scenario.n_sub()) * h.adjoint() / norm;
  }

  SpcaState st;
  st.exponents = scale_exponents(scenario, config.q_scale_margin);
  st.c = Eigen::VectorXd::Ones(J);
  st.zeta = Eigen::VectorXd::Ones(J);
  st.p = Eigen::VectorXd::Zero(J);
  st.theta = Eigen::VectorXd::Ones(J);
  st.floor = Eigen::VectorXd::Constant(J, config.p_floor);

  for (int j : st.exponents.active) {
    const LinkRef l = scenario.link(j);
    // Step 2: zeta from the interference cone at equality.
    const double zeta =
        std::sqrt(1.0 + interference_power(scenario, channels, beams, j));
    // Matched filtering makes h f real positive.
    const double hf = std::abs(dotu(channels.link_channel(l, l.cell), beams.f(j)));
    // Step 4: p from sqrt(p) zeta = h f, then theta0 = sqrt(p)/zeta.
    const double p = (hf / zeta) * (hf / zeta);
    // Step 3: c0 from the SINR constraint at equality, c^q = 1 + (hf/zeta)^2.
    const double c0 = std::pow(1.0 + p, st.exponents.alpha[j]);
    st.zeta[j] = zeta;
    st.p[j] = p;
    st.theta[j] = std::sqrt(p) / zeta;
    st.c[j] = std::max(c0, 1.0 + 1e-9);
    if (config.adaptive_floor) {
      st.floor[j] = std::min(config.p_floor, 0.5 * p);
    }
  }
  return {std::move(beams), std::move(st)};
}

VarId hyperbolic_tree(conic::Program& prog,
                      const std::vector<LinExpr>& leaves,
                      TreePadding padding) {
  if (leaves.empty()) {
    throw conic::ProgramError("hyperbolic_tree: no leaves");
  }
  int u = 0;
  while ((1 << u) < static_cast<int>(leaves.size())) ++u;

  const VarId root = prog.add_var("psi.root");
  prog.mark_nonneg(root);
  if (u == 0) {
    prog.add_equality(LinExpr(root) - leaves[0]);
    return root;
  }

  std::vector<LinExpr> level = leaves;
  level.resize(static_cast<std::size_t>(1) << u,
               padding == TreePadding::Ones ? LinExpr(1.0) : LinExpr(root));
  for (int l = u; l >= 1; --l) {
    const int pairs = 1 << (l - 1);
    std::vector<LinExpr> next;
    next.reserve(pairs);
    for (int i = 0; i < pairs; ++i) {
      VarId node;
      if (l == 1) {
        node = root;
      } else {
        node = prog.add_var("psi." + std::to_string(l - 1) + "." +
                            std::to_string(i));
        prog.mark_nonneg(node);
      }
      // (psi_i^{l-1})^2 <= psi_{2i-1}^l psi_{2i}^l
      prog.add_hyperbolic(LinExpr(node), level[2 * i], level[2 * i + 1]);
      next.emplace_back(node);
    }
    level = std::move(next);
  }
  return root;
}

IterationProgram build_iteration_program(const Scenario& scenario,
                                         const ChannelSet& channels,
                                         const SpcaState& state,
                                         const SpcaConfig& config) {
  config.validate();
  const int J = scenario.n_links();
  for (int j : state.exponents.active) {
    if (!(state.theta[j] > 0.0)) {
      throw ModelError("build_iteration_program: theta <= 0 on link " +
                       std::to_string(j));
    }
  }

  IterationProgram ip;
  conic::Program& prog = ip.prog;
  ip.f.resize(J);
  ip.c.assign(J, VarId{});
  ip.zeta.assign(J, VarId{});
  ip.p.assign(J, VarId{});

  for (int j = 0; j < J; ++j) {
    for (int t = 0; t < scenario.n_tx(); ++t) {
      ip.f[j].re.push_back(
          prog.add_var("f" + std::to_string(j) + ".re" + std::to_string(t)));
    }
    for (int t = 0; t < scenario.n_tx(); ++t) {
      ip.f[j].im.push_back(
          prog.add_var("f" + std::to_string(j) + ".im" + std::to_string(t)));
    }
  }
  for (int j : state.exponents.active) {
    ip.c[j] = prog.add_var("c" + std::to_string(j));
    ip.zeta[j] = prog.add_var("zeta" + std::to_string(j));
    ip.p[j] = prog.add_var("p" + std::to_string(j));
  }

  // Per-cell power cones ||vec(F_m)|| <= sqrt(P_m).
  for (int m = 0; m < scenario.n_cells(); ++m) {
    std::vector<LinExpr> tail;
    tail.reserve(2 * scenario.n_tx() * scenario.n_sub());
    for (int n = 0; n < scenario.n_sub(); ++n) {
      const int j = scenario.link_index(m, n);
      for (VarId v : ip.f[j].re) tail.emplace_back(v);
      for (VarId v : ip.f[j].im) tail.emplace_back(v);
    }
    prog.add_soc(LinExpr(std::sqrt(scenario.p_max(m))), std::move(tail));
  }

  for (int j : state.exponents.active) {
    const LinkRef l = scenario.link(j);
    auto [hf_re, hf_im] =
        conic::lift_complex(channels.link_channel(l, l.cell), ip.f[j]);

    // Interference cone: ||[1, h f interferers]|| <= zeta.
    std::vector<LinExpr> tail;
    tail.emplace_back(1.0);
    for (int mi = 0; mi < scenario.n_cells(); ++mi) {
      if (mi == l.cell) continue;
      const int ji = scenario.link_index(mi, l.sub);
      auto [cross_re, cross_im] =
          conic::lift_complex(channels.link_channel(l, mi), ip.f[ji]);
      tail.push_back(std::move(cross_re));
      tail.push_back(std::move(cross_im));
    }
    prog.add_soc(LinExpr(ip.zeta[j]), std::move(tail));

    // Zero imaginary part of the own-link product.
    prog.add_equality(hf_im);

    // SPCA cone enforcing U(zeta, p, theta) <= h f through the hyperbolic
    // form (theta/2) zeta^2 <= h f - p/(2 theta).
    const double theta = state.theta[j];
    const LinExpr x = hf_re - (0.5 / theta) * LinExpr(ip.p[j]);
    prog.add_hyperbolic(std::sqrt(0.5 * theta) * LinExpr(ip.zeta[j]), x,
                        LinExpr(1.0));

    // First-order linearization of c^q - 1 around the expansion point.
    const double ci = state.c[j];
    const double q = state.exponents.q[j];
    const double slope = q * std::pow(ci, q - 1.0);
    prog.add_nonneg(LinExpr(ip.p[j]) - slope * LinExpr(ip.c[j]) +
                    (slope * ci - std::pow(ci, q) + 1.0));

    // Stability floor and explicit nonnegativity.
    prog.add_nonneg(LinExpr(ip.p[j]) - state.floor[j]);
    prog.mark_nonneg(ip.c[j]);
  }

  std::vector<LinExpr> leaves;
  leaves.reserve(state.exponents.active.size());
  for (int j : state.exponents.active) leaves.emplace_back(ip.c[j]);
  ip.root = hyperbolic_tree(prog, leaves,
                            config.method == Method::GeometricMean
                                ? TreePadding::Root
                                : TreePadding::Ones);
  prog.maximize(LinExpr(ip.root));
  return ip;
}

namespace {

BeamformerSet extract_beams(const Scenario& scenario,
                            const IterationProgram& ip,
                            const conic::SolveResult& res) {
  BeamformerSet beams(scenario);
  for (int j = 0; j < scenario.n_links(); ++j) {
    Eigen::VectorXcd f(scenario.n_tx());
    for (int t = 0; t < scenario.n_tx(); ++t) {
      f[t] = cplx(res.value(ip.f[j].re[t]), res.value(ip.f[j].im[t]));
    }
    beams.f(j) = std::move(f);
  }
  // Snap marginal solver tolerance onto the exact power budget so every
  // reported iterate is feasible.
  for (int m = 0; m < scenario.n_cells(); ++m) {
    const double power = beams.cell_power(scenario, m);
    if (power > scenario.p_max(m)) {
      const double shrink = std::sqrt(scenario.p_max(m) / power);
      for (int n = 0; n < scenario.n_sub(); ++n) {
        beams.f(scenario.link_index(m, n)) *= shrink;
      }
    }
  }
  return beams;
}

}  // namespace

SpcaResult spca_solve(const Scenario& scenario, const ChannelSet& channels,
                      const SpcaConfig& config) {
  config.validate();
  auto [beams, state] = init_theta(scenario, channels, config);

  SpcaResult out;
  out.beams = beams;
  out.status = SpcaStatus::IterLimit;

  // Monotone safeguard: the loop tracks the best exact-WSR iterate and
  // re-tightens the surrogate around it every iteration, so the reported
  // trace is non-decreasing and a solve whose extracted beams score below
  // the incumbent registers as zero improvement (which then triggers the
  // stop rule).
  BeamformerSet incumbent = beams;
  RateReport incumbent_report;
  double incumbent_wsr = -std::numeric_limits<double>::infinity();
  double wsr_prev = -std::numeric_limits<double>::infinity();

  for (int it = 1; it <= config.n_iter_max; ++it) {
    IterationProgram ip =
        build_iteration_program(scenario, channels, state, config);
    const conic::SolveResult res = conic::solve(ip.prog, config.solver);
    if (!res.usable()) {
      if (it == 1) {
        throw InitInfeasibleError(
            std::string("spca_solve: first iteration not solvable (") +
            conic::to_string(res.status) + ")");
      }
      out.status = SpcaStatus::SolverStalled;
      break;
    }

    beams = extract_beams(scenario, ip, res);
    const RateReport report = evaluate(scenario, channels, beams);
    if (report.weighted_sum_rate > incumbent_wsr) {
      incumbent_wsr = report.weighted_sum_rate;
      incumbent = beams;
      incumbent_report = report;
    }

    double max_gap = 0.0;
    for (int j : state.exponents.active) {
      const double zeta = res.value(ip.zeta[j]);
      const double p = res.value(ip.p[j]);
      max_gap = std::max(max_gap, surrogate_upper(zeta, p, state.theta[j]) -
                                      std::sqrt(p) * zeta);
    }

    IterationRecord rec;
    rec.iter = it;
    rec.wsr = incumbent_wsr;
    rec.per_cell_power = incumbent_report.per_cell_power;
    rec.max_surrogate_gap = max_gap;
    rec.solver_status = res.status;
    out.trace.push_back(std::move(rec));

    if (it >= 2 && incumbent_wsr - wsr_prev <= config.stop_delta) {
      out.status = SpcaStatus::Converged;
      break;
    }
    wsr_prev = incumbent_wsr;

    // Step 5: theta <- sqrt(p)/zeta and expansion point <- c, re-tightened
    // at the incumbent (interference cone and SINR constraint at equality,
    // as they are at a true optimum).
    for (int j : state.exponents.active) {
      const double zeta = std::sqrt(
          1.0 + interference_power(scenario, channels, incumbent, j));
      const double gamma = incumbent_report.sinr[j];
      const double p = std::max(gamma, state.floor[j]);
      state.theta[j] = std::sqrt(p) / zeta;
      state.zeta[j] = zeta;
      state.p[j] = p;
      state.c[j] =
          std::max(std::pow(1.0 + gamma, state.exponents.alpha[j]), 1.0 + 1e-9);
    }
    state.iter = it;
  }

  out.beams = incumbent;
  out.report = evaluate(scenario, channels, out.beams);
  return out;
}

void write_trace_csv(const std::vector<IterationRecord>& trace,
                     std::ostream& os) {
  os << "# cobeam-trace v1\n";
  os << "iteration,wsr,max_surrogate_gap,solver_status";
  const int cells = trace.empty() ? 0 : static_cast<int>(trace[0].per_cell_power.size());
  for (int m = 0; m < cells; ++m) os << ",power_cell" << m;
  os << "\n";
  os.precision(12);
  for (const IterationRecord& r : trace) {
    os << r.iter << ',' << r.wsr << ',' << r.max_surrogate_gap << ','
       << conic::to_string(r.solver_status);
    for (int m = 0; m < cells; ++m) os << ',' << r.per_cell_power[m];
    os << "\n";
  }
}

}  // namespace cobeam::wsrm
