// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cobeam::conic {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  terms_.reserve(terms_.size() + o.terms_.size());
  for (const Term& t : o.terms_) terms_.push_back({t.var, -t.coeff});
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (Term& t : terms_) t.coeff *= s;
  constant_ *= s;
  return *this;
}

std::vector<LinExpr::Term> LinExpr::canonical_terms() const {
  std::map<std::int32_t, double> merged;
  for (const Term& t : terms_) merged[t.var] += t.coeff;
  std::vector<Term> out;
  out.reserve(merged.size());
  for (const auto& [var, coeff] : merged) {
    if (coeff != 0.0) out.push_back({var, coeff});
  }
  return out;
}

double LinExpr::eval(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const Term& t : terms_) v += t.coeff * x[t.var];
  return v;
}

std::int32_t LinExpr::max_var() const {
  std::int32_t m = -1;
  for (const Term& t : terms_) m = std::max(m, t.var);
  return m;
}

std::pair<LinExpr, LinExpr> lift_complex(const Eigen::RowVectorXcd& h,
                                         const ComplexVarVec& f) {
  if (static_cast<std::size_t>(h.size()) != f.re.size() ||
      f.re.size() != f.im.size()) {
    throw ProgramError("lift_complex: length mismatch, h has " +
                       std::to_string(h.size()) + " entries, f has " +
                       std::to_string(f.re.size()) + " re / " +
                       std::to_string(f.im.size()) + " im variables");
  }
  LinExpr real_part;
  LinExpr imag_part;
  for (Eigen::Index t = 0; t < h.size(); ++t) {
    const double hr = h[t].real();
    const double hi = h[t].imag();
    real_part += hr * LinExpr(f.re[t]) - hi * LinExpr(f.im[t]);
    imag_part += hi * LinExpr(f.re[t]) + hr * LinExpr(f.im[t]);
  }
  return {std::move(real_part), std::move(imag_part)};
}

void Program::validate(const LinExpr& e, const char* where) const {
  const std::int32_t m = e.max_var();
  if (m >= n_vars()) {
    throw ProgramError(std::string(where) + ": expression references variable #" +
                       std::to_string(m) + ", program has only " +
                       std::to_string(n_vars()));
  }
  for (const auto& t : e.canonical_terms()) {
    if (t.var < 0) {
      throw ProgramError(std::string(where) +
                         ": expression references an unbound variable id");
    }
    if (!std::isfinite(t.coeff)) {
      throw ProgramError(std::string(where) + ": non-finite coefficient on " +
                         var_names_.at(t.var));
    }
  }
  if (!std::isfinite(e.constant())) {
    throw ProgramError(std::string(where) + ": non-finite constant term");
  }
}

VarId Program::add_var(std::string name) {
  var_names_.push_back(std::move(name));
  return VarId{static_cast<std::int32_t>(var_names_.size()) - 1};
}

void Program::maximize(LinExpr objective) {
  validate(objective, "maximize");
  objective_ = std::move(objective);
}

EqId Program::add_equality(LinExpr expr) {
  validate(expr, "add_equality");
  equalities_.push_back(std::move(expr));
  return EqId{static_cast<std::int32_t>(equalities_.size()) - 1};
}

RowId Program::add_nonneg(LinExpr expr) {
  validate(expr, "add_nonneg");
  nonneg_rows_.push_back(std::move(expr));
  return RowId{static_cast<std::int32_t>(nonneg_rows_.size()) - 1};
}

SocId Program::add_soc(LinExpr head, std::vector<LinExpr> tail) {
  validate(head, "add_soc head");
  for (const LinExpr& e : tail) validate(e, "add_soc tail");
  soc_heads_.push_back(std::move(head));
  soc_tails_.push_back(std::move(tail));
  return SocId{static_cast<std::int32_t>(soc_heads_.size()) - 1};
}

SocId Program::add_hyperbolic(std::span<const LinExpr> z, const LinExpr& x,
                              const LinExpr& y) {
  std::vector<LinExpr> tail;
  tail.reserve(z.size() + 1);
  for (const LinExpr& zi : z) tail.push_back(2.0 * zi);
  tail.push_back(x - y);
  return add_soc(x + y, std::move(tail));
}

double Program::soc_violation(SocId id, const Eigen::VectorXd& x) const {
  double sq = 0.0;
  for (const LinExpr& e : soc_tails_.at(id.idx)) {
    const double v = e.eval(x);
    sq += v * v;
  }
  return std::max(0.0, std::sqrt(sq) - soc_heads_.at(id.idx).eval(x));
}

namespace {

void format_expr(std::ostream& os, const LinExpr& e,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& t : e.canonical_terms()) {
    if (!first) os << (t.coeff < 0 ? " - " : " + ");
    else if (t.coeff < 0) os << "-";
    const double a = std::abs(t.coeff);
    if (a != 1.0) os << a << "*";
    os << names.at(t.var);
    first = false;
  }
  const double c = e.constant();
  if (first) {
    os << c;
  } else if (c != 0.0) {
    os << (c < 0 ? " - " : " + ") << std::abs(c);
  }
}

}  // namespace

std::string Program::dump() const {
  std::ostringstream os;
  os << "maximize ";
  format_expr(os, objective_, var_names_);
  os << "\nsubject to\n";
  for (std::size_t i = 0; i < equalities_.size(); ++i) {
    os << "  eq[" << i << "]: ";
    format_expr(os, equalities_[i], var_names_);
    os << " == 0\n";
  }
  for (std::size_t i = 0; i < nonneg_rows_.size(); ++i) {
    os << "  lp[" << i << "]: ";
    format_expr(os, nonneg_rows_[i], var_names_);
    os << " >= 0\n";
  }
  for (std::size_t i = 0; i < soc_heads_.size(); ++i) {
    os << "  soc[" << i << "]: ||[";
    for (std::size_t t = 0; t < soc_tails_[i].size(); ++t) {
      if (t) os << ", ";
      format_expr(os, soc_tails_[i][t], var_names_);
    }
    os << "]|| <= ";
    format_expr(os, soc_heads_[i], var_names_);
    os << "\n";
  }
  return os.str();
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
    case SolveStatus::DualInfeasible: return "DualInfeasible";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    case SolveStatus::IterLimit: return "IterLimit";
  }
  return "Unknown";
}

}  // namespace cobeam::conic
