// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/oracle.hpp"

#include <array>
#include <cmath>

namespace cobeam::oracle {

void GridSpec::validate() const {
  if (angle_steps < 2 || power_steps < 2) {
    throw ModelError("grid: need at least 2 steps per dimension");
  }
  if (refine_rounds < 1 || !(zoom > 0.0) || !(zoom < 0.5)) {
    throw ModelError("grid: refine_rounds >= 1 and zoom in (0, 0.5) required");
  }
}

double GridSpec::effective_steps() const {
  return std::min(angle_steps, power_steps) /
         std::pow(2.0 * zoom, refine_rounds - 1);
}

namespace {

struct Box {
  double lo, hi;
  double at(int i, int steps) const {
    return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  }
  Box shrink(double center, double zoom, const Box& bounds) const {
    const double half = (hi - lo) * zoom;
    return {std::max(bounds.lo, center - half),
            std::min(bounds.hi, center + half)};
  }
};

Eigen::VectorXcd beam_from(double angle, double power) {
  Eigen::VectorXcd f(2);
  const double a = std::sqrt(std::max(0.0, power));
  f << a * std::cos(angle), a * std::sin(angle);
  return f;
}

}  // namespace

GridResult grid_wsrm(const Scenario& scenario, const ChannelSet& channels,
                     const GridSpec& grid) {
  grid.validate();
  if (scenario.n_cells() > 2 || scenario.n_sub() != 1 || scenario.n_tx() != 2) {
    throw ModelError(
        "grid_wsrm: restricted to <= 2 cells, 1 subcarrier, 2 antennas");
  }
  if (!channels.is_real(0.0)) {
    throw ModelError("grid_wsrm: requires real-valued channels");
  }
  const int cells = scenario.n_cells();
  const int dims = 2 * cells;
  const double points_per_round =
      std::pow(static_cast<double>(grid.angle_steps), cells) *
      std::pow(static_cast<double>(grid.power_steps), cells);
  if (points_per_round > 2e6) {
    throw ModelError("grid_wsrm: search space exceeds the exhaustive budget");
  }

  std::array<Box, 4> bounds{};
  std::array<Box, 4> box{};
  for (int m = 0; m < cells; ++m) {
    bounds[2 * m] = {0.0, M_PI};  // sign of f does not change any rate
    bounds[2 * m + 1] = {0.0, scenario.p_max(m)};
    box[2 * m] = bounds[2 * m];
    box[2 * m + 1] = bounds[2 * m + 1];
  }

  BeamformerSet work(scenario);
  GridResult best;
  best.wsr = -1.0;
  best.beams = work;
  std::array<double, 4> best_pt{};

  for (int round = 0; round < grid.refine_rounds; ++round) {
    const int a_steps = grid.angle_steps;
    const int p_steps = grid.power_steps;
    const int a2_steps = cells == 2 ? grid.angle_steps : 1;
    const int p2_steps = cells == 2 ? grid.power_steps : 1;
    for (int ia = 0; ia < a_steps; ++ia) {
      const double phi0 = box[0].at(ia, a_steps);
      for (int ip = 0; ip < p_steps; ++ip) {
        const double pw0 = box[1].at(ip, p_steps);
        work.f(0) = beam_from(phi0, pw0);
        for (int ja = 0; ja < a2_steps; ++ja) {
          for (int jp = 0; jp < p2_steps; ++jp) {
            double phi1 = 0.0, pw1 = 0.0;
            if (cells == 2) {
              phi1 = box[2].at(ja, a2_steps);
              pw1 = box[3].at(jp, p2_steps);
              work.f(1) = beam_from(phi1, pw1);
            }
            const RateReport r = evaluate(scenario, channels, work);
            if (r.weighted_sum_rate > best.wsr) {
              best.wsr = r.weighted_sum_rate;
              best.beams = work;
              best_pt = {phi0, pw0, phi1, pw1};
            }
          }
        }
      }
    }
    for (int d = 0; d < dims; ++d) {
      box[d] = box[d].shrink(best_pt[d], grid.zoom, bounds[d]);
    }
  }
  return best;
}

SingleLinkOptimum closed_form_single_link(const Eigen::RowVectorXcd& h,
                                          double p_max) {
  const double norm = h.norm();
  if (!(norm > 0.0)) {
    throw ModelError("closed_form_single_link: zero channel");
  }
  SingleLinkOptimum out;
  out.f = std::sqrt(p_max) * h.adjoint() / norm;
  out.rate = std::log2(1.0 + p_max * norm * norm);
  return out;
}

}  // namespace cobeam::oracle
