// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cobeam::conic {

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index of a real scalar decision variable.
struct VarId {
  std::int32_t idx = -1;
  bool valid() const { return idx >= 0; }
};

/// Sparse affine expression over program variables: sum of coeff * var plus
/// a constant.  Terms with the same variable are merged lazily.
class LinExpr {
 public:
  struct Term {
    std::int32_t var;
    double coeff;
  };

  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design
  LinExpr(VarId v) { terms_.push_back({v.idx, 1.0}); }  // NOLINT

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(double s, LinExpr e) { return e *= s; }
  friend LinExpr operator*(LinExpr e, double s) { return e *= s; }
  friend LinExpr operator-(LinExpr e) { return e *= -1.0; }

  double constant() const { return constant_; }
  /// Merged, variable-sorted term list (zero coefficients dropped).
  std::vector<Term> canonical_terms() const;

  /// Value of the expression at a full assignment of program variables.
  double eval(const Eigen::VectorXd& x) const;

  /// Largest referenced variable index, or -1 when constant.
  std::int32_t max_var() const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

/// A complex variable vector represented by its real and imaginary real
/// variables, [Re(f); Im(f)].  All complex quantities enter the real-valued
/// standard form through this type.
struct ComplexVarVec {
  std::vector<VarId> re;
  std::vector<VarId> im;
  std::size_t size() const { return re.size(); }
};

/// Real and imaginary part of h * f as affine expressions over the lifted
/// real variables of f.  h is a complex row vector of matching length.
std::pair<LinExpr, LinExpr> lift_complex(const Eigen::RowVectorXcd& h,
                                         const ComplexVarVec& f);

struct SocId {
  std::int32_t idx = -1;
};
struct EqId {
  std::int32_t idx = -1;
};
struct RowId {
  std::int32_t idx = -1;
};

/// Standard-form second-order cone program: linear objective (maximize),
/// sparse equality rows, SOC membership blocks ||tail||_2 <= head and
/// nonnegativity rows.  Convex by construction: only these constraint
/// classes exist.
class Program {
 public:
  VarId add_var(std::string name);
  int n_vars() const { return static_cast<int>(var_names_.size()); }
  const std::string& var_name(VarId v) const { return var_names_.at(v.idx); }

  void maximize(LinExpr objective);
  const LinExpr& objective() const { return objective_; }

  /// Adds the equality expr == 0.
  EqId add_equality(LinExpr expr);

  /// Adds the linear inequality expr >= 0.
  RowId add_nonneg(LinExpr expr);
  RowId mark_nonneg(VarId v) { return add_nonneg(LinExpr(v)); }

  /// Adds the membership constraint ||tail||_2 <= head.  An empty tail
  /// degenerates to head >= 0.
  SocId add_soc(LinExpr head, std::vector<LinExpr> tail);

  /// Adds the hyperbolic constraint z^T z <= x * y with x, y >= 0, encoded
  /// as the single cone ||[2z; x - y]||_2 <= x + y.
  SocId add_hyperbolic(std::span<const LinExpr> z, const LinExpr& x,
                       const LinExpr& y);
  SocId add_hyperbolic(const LinExpr& z, const LinExpr& x, const LinExpr& y) {
    return add_hyperbolic(std::span<const LinExpr>(&z, 1), x, y);
  }

  int n_equalities() const { return static_cast<int>(equalities_.size()); }
  int n_nonneg() const { return static_cast<int>(nonneg_rows_.size()); }
  int n_soc() const { return static_cast<int>(soc_heads_.size()); }

  const LinExpr& equality(EqId id) const { return equalities_.at(id.idx); }
  const LinExpr& nonneg_row(RowId id) const { return nonneg_rows_.at(id.idx); }
  const LinExpr& soc_head(SocId id) const { return soc_heads_.at(id.idx); }
  const std::vector<LinExpr>& soc_tail(SocId id) const {
    return soc_tails_.at(id.idx);
  }

  /// max(0, ||tail(x)|| - head(x)): violation of one SOC block at a point.
  double soc_violation(SocId id, const Eigen::VectorXd& x) const;

  /// Plain-text standard-form listing for debugging and cross-solver
  /// comparison.
  std::string dump() const;

 private:
  void validate(const LinExpr& e, const char* where) const;

  std::vector<std::string> var_names_;
  LinExpr objective_;
  std::vector<LinExpr> equalities_;
  std::vector<LinExpr> nonneg_rows_;
  std::vector<LinExpr> soc_heads_;
  std::vector<std::vector<LinExpr>> soc_tails_;
};

enum class SolveStatus {
  Optimal,
  PrimalInfeasible,
  DualInfeasible,
  NumericalFailure,
  IterLimit,
};

const char* to_string(SolveStatus s);

struct SolveTolerances {
  double primal = 1e-8;
  double dual = 1e-8;
  double gap = 1e-8;  // absolute and relative complementarity gap
  int max_iter = 200;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double duality_gap = std::numeric_limits<double>::infinity();
  double relative_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;

  bool ok() const { return status == SolveStatus::Optimal; }

  /// True when the iterate is close enough to optimal to act on even if the
  /// full tolerances were not reached (reduced-accuracy thresholds).
  /// Infeasibility certificates are never usable: their rays satisfy the
  /// homogeneous equations and would look clean under these measures.
  bool usable() const {
    if (status == SolveStatus::PrimalInfeasible ||
        status == SolveStatus::DualInfeasible) {
      return false;
    }
    return ok() || (primal_residual < 1e-4 && dual_residual < 1e-4 &&
                    (duality_gap < 5e-5 || relative_gap < 5e-5));
  }

  double value(VarId v) const { return x[v.idx]; }
  double value(const LinExpr& e) const { return e.eval(x); }
};

/// Solves the program with a homogeneous self-dual primal-dual interior
/// point method.  Infeasibility is reported as a status, never as a crash.
SolveResult solve(const Program& prog, const SolveTolerances& tol = {});

}  // namespace cobeam::conic
