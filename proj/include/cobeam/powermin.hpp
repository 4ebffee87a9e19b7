// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <iosfwd>
#include <vector>

#include "cobeam/conic.hpp"
#include "cobeam/model.hpp"

namespace cobeam::powermin {

/// Per-link SINR targets, linear scale, strictly positive.
struct SinrTargets {
  Eigen::VectorXd gamma;

  void validate(const Scenario& scenario) const;

  /// Targets taken from achieved SINRs (e.g. a converged WSRM run), clamped
  /// below at `min_target` so zero-rate links stay representable.
  static SinrTargets from_report(const RateReport& report,
                                 double min_target = 1e-12);
};

/// Objective choice: total transmit power (sum over cells, via per-cell
/// epigraph cones and rotated bounds) or the single worst-cell bound xi
/// with ||vec(F_m)|| <= xi for every cell.
enum class ObjectiveMode { TotalPower, MinMaxCellPower };

struct PowerMinProgram {
  conic::Program prog;
  std::vector<conic::ComplexVarVec> f;  // per link
  std::vector<conic::VarId> cell_power;  // TotalPower: t_m epigraphs
  conic::VarId xi;                       // MinMaxCellPower only
  ObjectiveMode mode = ObjectiveMode::TotalPower;
};

/// Single cone program for power minimization under per-subcarrier SINR
/// constraints: zero-imag rows, one SINR cone per link and the selected
/// objective structure.  No approximation is involved.
PowerMinProgram build_powermin(const Scenario& scenario,
                               const ChannelSet& channels,
                               const SinrTargets& targets, ObjectiveMode mode);

enum class PowerMinStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(PowerMinStatus s);

struct PowerMinResult {
  PowerMinStatus status = PowerMinStatus::NumericalFailure;
  BeamformerSet beams{0, 1};
  Eigen::VectorXd per_cell_power;
  double total_power = std::numeric_limits<double>::quiet_NaN();
  /// TotalPower: the total transmit power; MinMaxCellPower: xi, i.e. the
  /// amplitude bound whose square is the worst-cell power.
  double objective = std::numeric_limits<double>::quiet_NaN();

  bool ok() const { return status == PowerMinStatus::Optimal; }
};

/// Optimal is reported only after verifying the achieved SINRs against the
/// targets on the extracted beamformers (achieved >= Gamma - 1e-6); solver
/// iterates within a small factor of the requested tolerances that pass
/// this check are accepted.
PowerMinResult solve_powermin(
    const Scenario& scenario, const ChannelSet& channels,
    const SinrTargets& targets, ObjectiveMode mode = ObjectiveMode::TotalPower,
    const conic::SolveTolerances& tol = {1e-9, 1e-9, 1e-9, 300});

/// One row per link: target, achieved SINR, serving-cell power, status.
void write_powermin_csv(const Scenario& scenario, const ChannelSet& channels,
                        const SinrTargets& targets,
                        const PowerMinResult& result, std::ostream& os);

}  // namespace cobeam::powermin
