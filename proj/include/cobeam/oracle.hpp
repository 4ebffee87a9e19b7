// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "cobeam/model.hpp"

namespace cobeam::oracle {

/// Exhaustive-search resolution.  The search runs `refine_rounds` passes;
/// after each pass the box shrinks around the incumbent by `zoom`, so the
/// effective per-dimension resolution is roughly
/// steps / (2 * zoom)^(refine_rounds - 1).
struct GridSpec {
  int angle_steps = 31;
  int power_steps = 31;
  int refine_rounds = 3;
  double zoom = 0.15;

  void validate() const;
  double effective_steps() const;
};

struct GridResult {
  double wsr = 0.0;
  BeamformerSet beams{0, 1};
};

/// Brute-force WSR maximum over angle/power parameterized beamformers
/// f_m = sqrt(p_m) (cos phi_m, sin phi_m)^T.  Restricted to at most 2 cells,
/// one subcarrier, two antennas and real channels, where the
/// parameterization is exhaustive up to phase.
GridResult grid_wsrm(const Scenario& scenario, const ChannelSet& channels,
                     const GridSpec& grid = {});

struct SingleLinkOptimum {
  Eigen::VectorXcd f;
  double rate = 0.0;
};

/// Matched-filter optimum of an isolated link: f = sqrt(P) h^H / ||h||,
/// rate = log2(1 + P ||h||^2).
SingleLinkOptimum closed_form_single_link(const Eigen::RowVectorXcd& h,
                                          double p_max);

}  // namespace cobeam::oracle
