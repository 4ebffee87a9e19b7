// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "cobeam/conic.hpp"
#include "cobeam/model.hpp"

namespace cobeam::wsrm {

/// Objective encoding for the per-iteration cone program.  Both maximize a
/// strictly increasing transform of the product of the auxiliary rate
/// variables and therefore share their maximizers:
///  - GeometricMean builds the exact geometric mean (prod c)^(1/J) by padding
///    the hyperbolic tree with copies of its root;
///  - HyperbolicTree pads with constant-1 leaves, giving (prod c)^(1/2^u).
enum class Method { GeometricMean, HyperbolicTree };

const char* to_string(Method m);

struct SpcaConfig {
  Method method = Method::HyperbolicTree;
  int n_iter_max = 20;
  double stop_delta = 0.01;  // stop when the WSR increase drops below this
  double p_floor = 1e-4;     // epsilon of the p >= epsilon stability floor
  double q_scale_margin = 1.1;  // scaling so every exponent q stays below 1
  /// Caps each link's floor at half of its matched-filter initial p, so a
  /// deeply faded link cannot render the first program infeasible.  The
  /// floor of healthy links is exactly p_floor.
  bool adaptive_floor = true;
  conic::SolveTolerances solver{};

  void validate() const;
};

/// Per-link objective exponents after scaling: alpha = kappa * w with kappa
/// chosen so every positive alpha exceeds 1 (hence q = 1/alpha < 1, which
/// keeps c^q concave).  Zero-weight links are excluded from the objective
/// but keep their power and interference footprint.
struct Exponents {
  Eigen::VectorXd alpha;     // per link; 0 marks an excluded link
  Eigen::VectorXd q;         // 1/alpha for active links, 0 otherwise
  std::vector<int> active;   // links with positive weight
};

Exponents scale_exponents(const Scenario& scenario, double q_scale_margin = 1.1);

/// Iteration state: the SPCA parameter theta, the linearization expansion
/// points and the last solved slacks, all indexed per link (inactive links
/// hold neutral values).
struct SpcaState {
  Eigen::VectorXd c;      // expansion points c_i (>= 1)
  Eigen::VectorXd zeta;   // interference-plus-noise amplitude bound
  Eigen::VectorXd p;      // SINR surrogate
  Eigen::VectorXd theta;  // > 0
  Eigen::VectorXd floor;  // per-link lower bound applied to p
  Exponents exponents;
  int iter = 0;
};

/// Channel-matched initialization: f = sqrt(P/N_sub) h^H/||h||, then zeta,
/// c0 and p from the constraints at equality and theta0 = sqrt(p)/zeta.
std::pair<BeamformerSet, SpcaState> init_theta(const Scenario& scenario,
                                               const ChannelSet& channels,
                                               const SpcaConfig& config = {});

/// One iteration's cone program plus the variable handles needed to read
/// the solution back.
struct IterationProgram {
  conic::Program prog;
  std::vector<conic::ComplexVarVec> f;  // per link
  std::vector<conic::VarId> c;          // per link; invalid when inactive
  std::vector<conic::VarId> zeta;
  std::vector<conic::VarId> p;
  conic::VarId root;
};

IterationProgram build_iteration_program(const Scenario& scenario,
                                         const ChannelSet& channels,
                                         const SpcaState& state,
                                         const SpcaConfig& config);

enum class TreePadding { Ones, Root };

/// Procedure-1 style hyperbolic tree over the given leaves; returns the
/// root variable.  At tightness the root equals (prod leaves)^(1/2^u) for
/// Ones padding and the exact geometric mean for Root padding.
conic::VarId hyperbolic_tree(conic::Program& prog,
                             const std::vector<conic::LinExpr>& leaves,
                             TreePadding padding);

struct IterationRecord {
  int iter = 0;
  double wsr = 0.0;
  Eigen::VectorXd per_cell_power;
  double max_surrogate_gap = 0.0;  // max_j U(zeta,p,theta) - sqrt(p) zeta
  conic::SolveStatus solver_status = conic::SolveStatus::NumericalFailure;
};

enum class SpcaStatus {
  Converged,      // WSR increase dropped below stop_delta
  IterLimit,      // n_iter_max solves without meeting stop_delta
  SolverStalled,  // a mid-run solve failed; best iterate returned
};

const char* to_string(SpcaStatus s);

struct SpcaResult {
  SpcaStatus status = SpcaStatus::IterLimit;
  BeamformerSet beams{0, 1};
  RateReport report;
  std::vector<IterationRecord> trace;
  int iterations() const { return static_cast<int>(trace.size()); }
};

/// Thrown when the very first iteration is infeasible, which the matched
/// initialization is designed to prevent.
class InitInfeasibleError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Full SPCA loop: build, solve, update theta and the expansion points
/// until the exact weighted sum rate (recomputed by model evaluation, not
/// the surrogate) stops improving by more than stop_delta.
SpcaResult spca_solve(const Scenario& scenario, const ChannelSet& channels,
                      const SpcaConfig& config = {});

/// Trace CSV: iteration, WSR, per-cell powers, max surrogate gap, status.
void write_trace_csv(const std::vector<IterationRecord>& trace,
                     std::ostream& os);

}  // namespace cobeam::wsrm
