// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Homogeneous self-dual primal-dual interior point method for second-order
// cone programs, in the style of the conelp algorithm used by ECOS and
// CVXOPT: Nesterov-Todd scaling, Mehrotra predictor-corrector, sparse
// quasi-definite KKT factorization with static regularization and iterative
// refinement.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "cobeam/conic.hpp"

namespace cobeam::conic {
namespace {

constexpr double kStaticReg = 7e-8;
constexpr double kStepScale = 0.99;
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 0.9999;
constexpr double kLinsysAcc = 5e-13;
constexpr int kMaxRefine = 10;
constexpr double kSafeguard = 500.0;
constexpr double kStepMin = 1e-7;
// Reduced thresholds used to flag nearly converged iterates after a stall.
constexpr double kFeasInacc = 1e-4;
constexpr double kGapInacc = 5e-5;

struct StandardForm {
  int n = 0;  // variables
  int p = 0;  // equality rows
  int m = 0;  // cone rows
  int n_lp = 0;
  std::vector<int> soc_dims;  // each >= 2, rows follow the LP block
  Eigen::SparseMatrix<double> A;  // p x n
  Eigen::SparseMatrix<double> G;  // m x n
  Eigen::VectorXd b, h, c;        // minimize c'x
};

void append_row(std::vector<Eigen::Triplet<double>>& trips, int row,
                const LinExpr& e, Eigen::VectorXd& rhs, double sign) {
  // Encodes expr as rhs_row - row(x), i.e. slack s_row = expr(x).
  for (const auto& t : e.canonical_terms()) {
    trips.emplace_back(row, t.var, sign * t.coeff);
  }
  rhs[row] = -sign * e.constant();
}

StandardForm build_standard_form(const Program& prog) {
  StandardForm sf;
  sf.n = prog.n_vars();

  sf.c = Eigen::VectorXd::Zero(sf.n);
  for (const auto& t : prog.objective().canonical_terms()) {
    sf.c[t.var] = -t.coeff;  // maximize a'x  ->  minimize -a'x
  }

  // Equalities: expr == 0 becomes coeffs * x = -const.
  sf.p = prog.n_equalities();
  {
    std::vector<Eigen::Triplet<double>> trips;
    sf.b = Eigen::VectorXd::Zero(sf.p);
    for (int i = 0; i < sf.p; ++i) {
      append_row(trips, i, prog.equality(EqId{i}), sf.b, 1.0);
    }
    sf.A.resize(sf.p, sf.n);
    sf.A.setFromTriplets(trips.begin(), trips.end());
  }

  // Cone rows: s = h - G x with s = expr(x) per row, so G carries -coeffs
  // and h the constants.  LP rows (nonneg constraints plus zero-tail SOC
  // blocks) come first, then the SOC blocks head-first.
  std::vector<const LinExpr*> lp_rows;
  for (int i = 0; i < prog.n_nonneg(); ++i) {
    lp_rows.push_back(&prog.nonneg_row(RowId{i}));
  }
  std::vector<int> real_socs;
  for (int i = 0; i < prog.n_soc(); ++i) {
    if (prog.soc_tail(SocId{i}).empty()) {
      lp_rows.push_back(&prog.soc_head(SocId{i}));
    } else {
      real_socs.push_back(i);
    }
  }
  sf.n_lp = static_cast<int>(lp_rows.size());
  sf.m = sf.n_lp;
  for (int i : real_socs) {
    const int dim = 1 + static_cast<int>(prog.soc_tail(SocId{i}).size());
    sf.soc_dims.push_back(dim);
    sf.m += dim;
  }

  std::vector<Eigen::Triplet<double>> trips;
  sf.h = Eigen::VectorXd::Zero(sf.m);
  int row = 0;
  for (const LinExpr* e : lp_rows) {
    append_row(trips, row++, *e, sf.h, -1.0);
  }
  for (int i : real_socs) {
    append_row(trips, row++, prog.soc_head(SocId{i}), sf.h, -1.0);
    for (const LinExpr& e : prog.soc_tail(SocId{i})) {
      append_row(trips, row++, e, sf.h, -1.0);
    }
  }
  sf.G.resize(sf.m, sf.n);
  sf.G.setFromTriplets(trips.begin(), trips.end());
  return sf;
}

// Ruiz-style equilibration.  Rows of one SOC block share a single scale so
// the cone geometry is preserved.
struct Equilibration {
  Eigen::VectorXd col;    // n
  Eigen::VectorXd row_a;  // p
  Eigen::VectorXd row_g;  // m

  void apply(StandardForm& sf) {
    col = Eigen::VectorXd::Ones(sf.n);
    row_a = Eigen::VectorXd::Ones(sf.p);
    row_g = Eigen::VectorXd::Ones(sf.m);

    auto sqrt_or_one = [](double v) {
      return (v < 1e-10 || !std::isfinite(v)) ? 1.0 : std::sqrt(v);
    };

    for (int sweep = 0; sweep < 3; ++sweep) {
      Eigen::VectorXd cn = Eigen::VectorXd::Zero(sf.n);
      Eigen::VectorXd ra = Eigen::VectorXd::Zero(sf.p);
      Eigen::VectorXd rg = Eigen::VectorXd::Zero(sf.m);
      for (int k = 0; k < sf.A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, k); it; ++it) {
          const double a = std::abs(it.value());
          cn[it.col()] = std::max(cn[it.col()], a);
          ra[it.row()] = std::max(ra[it.row()], a);
        }
      }
      for (int k = 0; k < sf.G.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, k); it; ++it) {
          const double a = std::abs(it.value());
          cn[it.col()] = std::max(cn[it.col()], a);
          rg[it.row()] = std::max(rg[it.row()], a);
        }
      }
      // Collapse SOC blocks to one scale per cone.
      int off = sf.n_lp;
      for (int dim : sf.soc_dims) {
        const double block = rg.segment(off, dim).maxCoeff();
        rg.segment(off, dim).setConstant(block);
        off += dim;
      }
      Eigen::VectorXd dc = cn.unaryExpr(sqrt_or_one);
      Eigen::VectorXd da = ra.unaryExpr(sqrt_or_one);
      Eigen::VectorXd dg = rg.unaryExpr(sqrt_or_one);

      for (int k = 0; k < sf.A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, k); it; ++it) {
          it.valueRef() /= da[it.row()] * dc[it.col()];
        }
      }
      for (int k = 0; k < sf.G.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, k); it; ++it) {
          it.valueRef() /= dg[it.row()] * dc[it.col()];
        }
      }
      col = col.cwiseQuotient(dc);
      row_a = row_a.cwiseQuotient(da);
      row_g = row_g.cwiseQuotient(dg);
    }
    // x = diag(col) * xbar, so cbar = diag(col) * c keeps c'x invariant.
    sf.c = sf.c.cwiseProduct(col);
    sf.b = sf.b.cwiseProduct(row_a);
    sf.h = sf.h.cwiseProduct(row_g);
  }
};

struct SocScaling {
  double eta2 = 1.0;
  Eigen::VectorXd wbar;  // NT point (a, q), a^2 - ||q||^2 = 1
};

class Conelp {
 public:
  Conelp(StandardForm sf, const SolveTolerances& tol)
      : sf_(std::move(sf)), tol_(tol) {
    deg_ = sf_.n_lp + static_cast<int>(sf_.soc_dims.size());
    dim_k_ = sf_.n + sf_.p + sf_.m;
    At_ = sf_.A.transpose();
    Gt_ = sf_.G.transpose();
    lp_w2_ = Eigen::VectorXd::Ones(sf_.n_lp);
    socs_.resize(sf_.soc_dims.size());
    for (auto& sc : socs_) sc.eta2 = 1.0;
  }

  SolveResult run();

 private:
  // --- cone algebra on the [lp | socs] layout -----------------------------
  template <typename F>
  void for_each_soc(F&& f) const {
    int off = sf_.n_lp;
    for (std::size_t k = 0; k < sf_.soc_dims.size(); ++k) {
      f(k, off, sf_.soc_dims[k]);
      off += sf_.soc_dims[k];
    }
  }

  Eigen::VectorXd cone_identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(sf_.m);
    e.head(sf_.n_lp).setOnes();
    for_each_soc([&](std::size_t, int off, int) { e[off] = 1.0; });
    return e;
  }

  void bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& s) const {
    double alpha = -0.99;
    for (int i = 0; i < sf_.n_lp; ++i) {
      if (r[i] <= 0.0) alpha = std::max(alpha, -r[i]);
    }
    for_each_soc([&](std::size_t, int off, int dim) {
      const double res = r.segment(off + 1, dim - 1).norm() - r[off];
      alpha = std::max(alpha, res);
    });
    s = r;
    if (alpha >= 0.0) {
      s.head(sf_.n_lp).array() += 1.0 + alpha;
      for_each_soc([&](std::size_t, int off, int) { s[off] += 1.0 + alpha; });
    }
  }

  bool update_scalings(const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
    if (sf_.n_lp > 0) {
      for (int i = 0; i < sf_.n_lp; ++i) {
        if (s[i] <= 0.0 || z[i] <= 0.0) return false;
      }
      lp_w2_ = s.head(sf_.n_lp).cwiseQuotient(z.head(sf_.n_lp));
    }
    bool ok = true;
    for_each_soc([&](std::size_t k, int off, int dim) {
      if (!ok) return;
      const double sres =
          s[off] * s[off] - s.segment(off + 1, dim - 1).squaredNorm();
      const double zres =
          z[off] * z[off] - z.segment(off + 1, dim - 1).squaredNorm();
      if (sres <= 0.0 || zres <= 0.0) {
        ok = false;
        return;
      }
      const double snorm = std::sqrt(sres);
      const double znorm = std::sqrt(zres);
      const Eigen::VectorXd sbar = s.segment(off, dim) / snorm;
      const Eigen::VectorXd zbar = z.segment(off, dim) / znorm;
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      SocScaling& sc = socs_[k];
      sc.eta2 = snorm / znorm;
      sc.wbar.resize(dim);
      sc.wbar[0] = (0.5 / gamma) * (sbar[0] + zbar[0]);
      sc.wbar.tail(dim - 1) =
          (0.5 / gamma) * (sbar.tail(dim - 1) - zbar.tail(dim - 1));
    });
    if (ok) scale(z, lambda_);
    return ok;
  }

  /// out = W * v (Nesterov-Todd scaling; W is symmetric).
  void scale(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.resize(sf_.m);
    out.head(sf_.n_lp) =
        lp_w2_.cwiseSqrt().cwiseProduct(v.head(sf_.n_lp));
    for_each_soc([&](std::size_t k, int off, int dim) {
      const SocScaling& sc = socs_[k];
      const double eta = std::sqrt(sc.eta2);
      const double a = sc.wbar[0];
      const auto q = sc.wbar.tail(dim - 1);
      const double zeta = q.dot(v.segment(off + 1, dim - 1));
      out[off] = eta * (a * v[off] + zeta);
      out.segment(off + 1, dim - 1) =
          eta * (v.segment(off + 1, dim - 1) +
                 (v[off] + zeta / (1.0 + a)) * q);
    });
  }

  /// out += W^2 * v, used by iterative refinement.
  void scale2_add(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.head(sf_.n_lp) += lp_w2_.cwiseProduct(v.head(sf_.n_lp));
    for_each_soc([&](std::size_t k, int off, int dim) {
      const SocScaling& sc = socs_[k];
      // W^2 = eta^2 (2 wbar wbar' - J)
      const double wv = sc.wbar.dot(v.segment(off, dim));
      out.segment(off, dim) += sc.eta2 * 2.0 * wv * sc.wbar;
      out[off] -= sc.eta2 * v[off];
      out.segment(off + 1, dim - 1) +=
          sc.eta2 * v.segment(off + 1, dim - 1);
    });
  }

  /// w = u o v (Jordan product).
  void conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                     Eigen::VectorXd& w) const {
    w.resize(sf_.m);
    w.head(sf_.n_lp) = u.head(sf_.n_lp).cwiseProduct(v.head(sf_.n_lp));
    for_each_soc([&](std::size_t, int off, int dim) {
      w[off] = u.segment(off, dim).dot(v.segment(off, dim));
      w.segment(off + 1, dim - 1) = u[off] * v.segment(off + 1, dim - 1) +
                                    v[off] * u.segment(off + 1, dim - 1);
    });
  }

  /// v = u \ w (inverse Jordan product).
  void conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                      Eigen::VectorXd& v) const {
    v.resize(sf_.m);
    v.head(sf_.n_lp) = w.head(sf_.n_lp).cwiseQuotient(u.head(sf_.n_lp));
    for_each_soc([&](std::size_t, int off, int dim) {
      const double u0 = u[off];
      const double w0 = w[off];
      const auto u1 = u.segment(off + 1, dim - 1);
      const auto w1 = w.segment(off + 1, dim - 1);
      const double rho = u0 * u0 - u1.squaredNorm();
      const double zeta = u1.dot(w1);
      v[off] = (u0 * w0 - zeta) / rho;
      v.segment(off + 1, dim - 1) = ((zeta / u0 - w0) / rho) * u1 + w1 / u0;
    });
  }

  /// Largest step alpha with v + alpha * dv staying in the cone closure.
  double max_cone_step(const Eigen::VectorXd& v,
                       const Eigen::VectorXd& dv) const {
    double alpha = 1e10;
    for (int i = 0; i < sf_.n_lp; ++i) {
      if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    }
    for_each_soc([&](std::size_t, int off, int dim) {
      const double v0 = v[off];
      const double d0 = dv[off];
      const auto v1 = v.segment(off + 1, dim - 1);
      const auto d1 = dv.segment(off + 1, dim - 1);
      const double a = d0 * d0 - d1.squaredNorm();
      const double b = 2.0 * (v0 * d0 - v1.dot(d1));
      const double cq = v0 * v0 - v1.squaredNorm();
      // Smallest positive root of a t^2 + b t + c = 0 bounds the step.
      double root = 1e10;
      if (std::abs(a) < 1e-300) {
        if (b < 0.0) root = -cq / b;
      } else {
        const double disc = b * b - 4.0 * a * cq;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double r1 = (-b - sq) / (2.0 * a);
          const double r2 = (-b + sq) / (2.0 * a);
          const double lo = std::min(r1, r2);
          const double hi = std::max(r1, r2);
          if (lo > 0.0) {
            root = lo;
          } else if (hi > 0.0 && a < 0.0) {
            root = hi;
          }
        } else if (a < 0.0) {
          root = 0.0;  // should not happen from a strict interior point
        }
      }
      if (cq <= 0.0) root = 0.0;
      if (d0 < 0.0) root = std::min(root, -v0 / d0);
      alpha = std::min(alpha, root);
    });
    return alpha;
  }

  double max_step(const Eigen::VectorXd& ds, const Eigen::VectorXd& dz,
                  double dtau, double dkap) const {
    double alpha = std::min(max_cone_step(s_, ds), max_cone_step(z_, dz));
    if (dtau < 0.0) alpha = std::min(alpha, -tau_ / dtau);
    if (dkap < 0.0) alpha = std::min(alpha, -kap_ / dkap);
    return alpha;
  }

  // --- KKT system ----------------------------------------------------------
  void assemble_kkt(bool identity_scaling) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(sf_.A.nonZeros() + sf_.G.nonZeros() + dim_k_ + sf_.m * 4);
    for (int i = 0; i < sf_.n; ++i) trips.emplace_back(i, i, delta_);
    for (int k = 0; k < sf_.A.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf_.A, k); it; ++it) {
        trips.emplace_back(sf_.n + it.row(), it.col(), it.value());
      }
    }
    for (int i = 0; i < sf_.p; ++i) {
      trips.emplace_back(sf_.n + i, sf_.n + i, -delta_);
    }
    const int gbase = sf_.n + sf_.p;
    for (int k = 0; k < sf_.G.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf_.G, k); it; ++it) {
        trips.emplace_back(gbase + it.row(), it.col(), it.value());
      }
    }
    // -(W^2 + delta I) block, lower triangle.  SOC blocks are structurally
    // dense so the sparsity pattern is iteration independent.
    for (int i = 0; i < sf_.n_lp; ++i) {
      const double w2 = identity_scaling ? 1.0 : lp_w2_[i];
      trips.emplace_back(gbase + i, gbase + i, -w2 - delta_);
    }
    for_each_soc([&](std::size_t k, int off, int dim) {
      const SocScaling& sc = socs_[k];
      for (int r = 0; r < dim; ++r) {
        for (int t = 0; t <= r; ++t) {
          double w2;
          if (identity_scaling) {
            w2 = (r == t) ? 1.0 : 0.0;
          } else {
            w2 = sc.eta2 * 2.0 * sc.wbar[r] * sc.wbar[t];
            if (r == t) w2 += sc.eta2 * ((r == 0) ? -1.0 : 1.0);
          }
          double val = -w2;
          if (r == t) val -= delta_;
          trips.emplace_back(gbase + off + r, gbase + off + t, val);
        }
      }
    });
    kkt_.resize(dim_k_, dim_k_);
    kkt_.setFromTriplets(trips.begin(), trips.end());
  }

  bool factorize(bool identity_scaling) {
    assemble_kkt(identity_scaling);
    if (!analyzed_) {
      ldlt_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    return ldlt_.info() == Eigen::Success;
  }

  /// Solves the unregularized KKT system by refining against the true
  /// matrix.  identity_scaling selects W^2 = I (initialization).  Returns
  /// the achieved infinity-norm residual so callers can detect a stale or
  /// badly conditioned factorization.
  double solve_kkt(const Eigen::VectorXd& rhs, bool identity_scaling,
                   Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                   Eigen::VectorXd& dz) const {
    Eigen::VectorXd u = ldlt_.solve(rhs);
    const double threshold =
        kLinsysAcc * (1.0 + rhs.lpNorm<Eigen::Infinity>());
    double prev_err = std::numeric_limits<double>::max();
    double nerr = prev_err;
    Eigen::VectorXd correction;
    for (int it = 0; it <= kMaxRefine; ++it) {
      Eigen::VectorXd err(dim_k_);
      const auto ux = u.head(sf_.n);
      const auto uy = u.segment(sf_.n, sf_.p);
      const auto uz = u.tail(sf_.m);
      err.head(sf_.n) = rhs.head(sf_.n) - Gt_ * uz;
      if (sf_.p > 0) err.head(sf_.n) -= At_ * uy;
      if (sf_.p > 0) err.segment(sf_.n, sf_.p) =
          rhs.segment(sf_.n, sf_.p) - sf_.A * ux;
      err.tail(sf_.m) = rhs.tail(sf_.m) - sf_.G * ux;
      if (identity_scaling) {
        err.tail(sf_.m) += uz;
      } else {
        Eigen::VectorXd tail = err.tail(sf_.m);
        scale2_add(uz, tail);
        err.tail(sf_.m) = tail;
      }
      nerr = err.lpNorm<Eigen::Infinity>();
      if (it > 0 && nerr > prev_err) {
        u -= correction;  // refinement diverged, undo
        nerr = prev_err;
        break;
      }
      if (nerr <= threshold || it == kMaxRefine ||
          (it > 0 && prev_err < 1.3 * nerr)) {
        break;
      }
      prev_err = nerr;
      correction = ldlt_.solve(err);
      u += correction;
    }
    dx = u.head(sf_.n);
    dy = u.segment(sf_.n, sf_.p);
    dz = u.tail(sf_.m);
    return nerr;
  }

  // --- residuals / statistics ----------------------------------------------
  void compute_residuals() {
    rx_ = -Gt_ * z_;
    if (sf_.p > 0) rx_ -= At_ * y_;
    hresx_ = rx_.norm();
    rx_ -= tau_ * sf_.c;

    if (sf_.p > 0) {
      ry_ = sf_.A * x_;
      hresy_ = ry_.norm();
      ry_ -= tau_ * sf_.b;
    } else {
      ry_.resize(0);
      hresy_ = 0.0;
    }

    rz_ = s_ + sf_.G * x_;
    hresz_ = rz_.norm();
    rz_ -= tau_ * sf_.h;

    cx_ = sf_.c.dot(x_);
    by_ = sf_.p > 0 ? sf_.b.dot(y_) : 0.0;
    hz_ = sf_.h.dot(z_);
    rt_ = kap_ + cx_ + by_ + hz_;

    gap_ = s_.dot(z_);
    mu_ = (gap_ + kap_ * tau_) / (deg_ + 1);

    // Residuals of the de-homogenized iterate (x/tau, ...) measured
    // relative to the iterate norms, so problems with large solutions are
    // judged on relative feasibility.
    const double nx = x_.norm(), ny = y_.norm(), nz = z_.norm(),
                 ns = s_.norm();
    const double nry =
        sf_.p > 0
            ? ry_.norm() / std::max(tau_ * std::max(1.0, resy0_), nx)
            : 0.0;
    const double nrz =
        rz_.norm() / std::max(tau_ * std::max(1.0, resz0_), nx + ns);
    pres_ = std::max(nry, nrz);
    dres_ = rx_.norm() / std::max(tau_ * std::max(1.0, resx0_), ny + nz);

    pcost_ = cx_ / tau_;
    dcost_ = -(hz_ + by_) / tau_;
    if (pcost_ < 0.0) {
      relgap_ = gap_ / (-pcost_);
    } else if (dcost_ > 0.0) {
      relgap_ = gap_ / dcost_;
    } else {
      relgap_ = std::numeric_limits<double>::infinity();
    }

    pinfres_ = std::numeric_limits<double>::infinity();
    dinfres_ = std::numeric_limits<double>::infinity();
    if ((hz_ + by_) / std::max(ny + nz, 1.0) < -1e-8) {
      pinfres_ = hresx_ / std::max(ny + nz, 1.0);
    }
    if (cx_ / std::max(nx, 1.0) < -1e-8) {
      dinfres_ = std::max(hresy_ / std::max(nx, 1.0),
                          hresz_ / std::max(nx + ns, 1.0));
    }
  }

  enum class Verdict { NotYet, Optimal, PrimalInfeasible, DualInfeasible };

  Verdict check_exit(double feastol, double abstol, double reltol) const {
    // Residuals are relative to the iterate norms, which also shrink along
    // infeasibility rays, so optimality additionally requires tau to
    // dominate kappa.
    if (kap_ < tau_ && (-cx_ > 0.0 || -by_ - hz_ >= -abstol) &&
        pres_ < feastol && dres_ < feastol &&
        (gap_ < abstol || relgap_ < reltol)) {
      return Verdict::Optimal;
    }
    if (dinfres_ < feastol && tau_ < kap_) return Verdict::DualInfeasible;
    if ((pinfres_ < feastol && tau_ < kap_) ||
        (tau_ < feastol && kap_ < feastol && pinfres_ < feastol)) {
      return Verdict::PrimalInfeasible;
    }
    return Verdict::NotYet;
  }

  struct Iterate {
    Eigen::VectorXd x, y, z, s;
    double tau, kap;
    double pres, dres, gap, relgap, mu;
    int iter;
  };

  Iterate snapshot(int iter) const {
    return {x_, y_, z_, s_, tau_, kap_, pres_, dres_, gap_, relgap_, mu_,
            iter};
  }

  void restore(const Iterate& it) {
    x_ = it.x;
    y_ = it.y;
    z_ = it.z;
    s_ = it.s;
    tau_ = it.tau;
    kap_ = it.kap;
  }

  StandardForm sf_;
  SolveTolerances tol_;
  int deg_ = 0;
  int dim_k_ = 0;

  Eigen::SparseMatrix<double> At_, Gt_;
  Eigen::SparseMatrix<double> kkt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  double delta_ = kStaticReg;

  Eigen::VectorXd lp_w2_;
  std::vector<SocScaling> socs_;
  Eigen::VectorXd lambda_;

  Eigen::VectorXd x_, y_, z_, s_;
  double tau_ = 1.0, kap_ = 1.0;

  Eigen::VectorXd rx_, ry_, rz_;
  double hresx_ = 0, hresy_ = 0, hresz_ = 0;
  double cx_ = 0, by_ = 0, hz_ = 0, rt_ = 0;
  double gap_ = 0, mu_ = 0, pres_ = 0, dres_ = 0, relgap_ = 0;
  double pcost_ = 0, dcost_ = 0;
  double pinfres_ = 0, dinfres_ = 0;
  double resx0_ = 1, resy0_ = 1, resz0_ = 1;
};

SolveResult Conelp::run() {
  SolveResult out;
  out.x = Eigen::VectorXd::Zero(sf_.n);

  Equilibration equil;
  equil.apply(sf_);
  At_ = sf_.A.transpose();
  Gt_ = sf_.G.transpose();

  resx0_ = std::max(1.0, sf_.c.norm());
  resy0_ = std::max(1.0, sf_.b.norm());
  resz0_ = std::max(1.0, sf_.h.norm());

  if (!factorize(/*identity_scaling=*/true)) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }

  // Initial point from the two standard least-squares solves.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim_k_);
  rhs.segment(sf_.n, sf_.p) = sf_.b;
  rhs.tail(sf_.m) = sf_.h;
  Eigen::VectorXd dx1, dy1, dz1, dx2, dy2, dz2;
  solve_kkt(rhs, true, dx1, dy1, dz1);
  x_ = dx1;
  bring_to_cone(-dz1, s_);

  rhs.setZero();
  rhs.head(sf_.n) = -sf_.c;
  solve_kkt(rhs, true, dx2, dy2, dz2);
  y_ = dy2;
  bring_to_cone(dz2, z_);

  tau_ = 1.0;
  kap_ = 1.0;

  Eigen::VectorXd rhs1(dim_k_);
  rhs1.head(sf_.n) = -sf_.c;
  rhs1.segment(sf_.n, sf_.p) = sf_.b;
  rhs1.tail(sf_.m) = sf_.h;

  const Eigen::VectorXd e = cone_identity();

  Iterate best = snapshot(0);
  bool have_best = false;
  double pres_prev = std::numeric_limits<double>::max();
  double last_step = 1.0;
  Verdict verdict = Verdict::NotYet;
  bool stalled = false;
  int iter = 0;

  const bool trace = std::getenv("COBEAM_IPM_TRACE") != nullptr;
  for (iter = 0; iter <= tol_.max_iter; ++iter) {
    compute_residuals();
    if (trace) {
      std::fprintf(stderr,
                   "it %3d pcost %+.6e pres %.2e dres %.2e relgap %.2e tau "
                   "%.2e kap %.2e step %.2e pinf %.2e dinf %.2e\n",
                   iter, pcost_, pres_, dres_, relgap_, tau_, kap_, last_step,
                   pinfres_, dinfres_);
    }

    const bool pres_blowup =
        pres_ > kSafeguard * pres_prev && pres_ > tol_.primal;
    if (iter > 0 && (pres_blowup || gap_ < 0.0)) {
      if (have_best) restore(best);
      compute_residuals();
      stalled = true;
      break;
    }
    pres_prev = pres_;

    verdict = check_exit(std::max(tol_.primal, tol_.dual), tol_.gap, tol_.gap);
    // Feasibility residuals are checked against their own tolerances.
    if (verdict == Verdict::Optimal &&
        (pres_ >= tol_.primal || dres_ >= tol_.dual)) {
      verdict = Verdict::NotYet;
    }
    if (verdict != Verdict::NotYet) break;

    if (iter > 0 && last_step <= kStepMin) {
      if (have_best) restore(best);
      compute_residuals();
      stalled = true;
      break;
    }
    if (iter == tol_.max_iter) break;
    if (!std::isfinite(pcost_)) {
      if (have_best) restore(best);
      compute_residuals();
      stalled = true;
      break;
    }

    const double best_metric =
        best.pres + best.dres + std::min(best.relgap, 1.0);
    const double cur_metric = pres_ + dres_ + std::min(relgap_, 1.0);
    if (!have_best || cur_metric < best_metric) {
      best = snapshot(iter);
      have_best = true;
    }

    if (!update_scalings(s_, z_)) {
      stalled = true;
      if (have_best) restore(best);
      compute_residuals();
      break;
    }
    if (!factorize(false)) {
      stalled = true;
      if (have_best) restore(best);
      compute_residuals();
      break;
    }

    solve_kkt(rhs1, false, dx1, dy1, dz1);

    // Affine (predictor) direction.
    Eigen::VectorXd rhs2(dim_k_);
    rhs2.head(sf_.n) = rx_;
    rhs2.segment(sf_.n, sf_.p) = -ry_;
    rhs2.tail(sf_.m) = s_ - rz_;
    solve_kkt(rhs2, false, dx2, dy2, dz2);

    const double dtau_denom =
        kap_ / tau_ - sf_.c.dot(dx1) - sf_.b.dot(dy1) - sf_.h.dot(dz1);
    if (!std::isfinite(dtau_denom) || std::abs(dtau_denom) < 1e-300) {
      stalled = true;
      if (have_best) restore(best);
      compute_residuals();
      break;
    }
    const double dtau_aff =
        (rt_ - kap_ + sf_.c.dot(dx2) + sf_.b.dot(dy2) + sf_.h.dot(dz2)) /
        dtau_denom;
    Eigen::VectorXd dz_aff = dz2 + dtau_aff * dz1;
    Eigen::VectorXd w_dz_aff;
    scale(dz_aff, w_dz_aff);
    Eigen::VectorXd dsw_aff = -w_dz_aff - lambda_;  // W^{-T} ds
    Eigen::VectorXd ds_aff;
    scale(dsw_aff, ds_aff);
    const double dkap_aff = -kap_ - kap_ / tau_ * dtau_aff;

    const double alpha_aff =
        std::min(1.0, max_step(ds_aff, dz_aff, dtau_aff, dkap_aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), kSigmaMin,
                                    kSigmaMax);

    // Combined (predictor + corrector + centering) direction.
    Eigen::VectorXd ds_scaled;
    conic_product(lambda_, lambda_, ds_scaled);
    Eigen::VectorXd corr;
    conic_product(dsw_aff, w_dz_aff, corr);
    ds_scaled += corr;
    ds_scaled -= sigma * mu_ * e;
    const double bkap = kap_ * tau_ + dkap_aff * dtau_aff - sigma * mu_;

    Eigen::VectorXd lam_div;  // lambda \ ds
    conic_division(lambda_, ds_scaled, lam_div);
    Eigen::VectorXd w_lam_div;
    scale(lam_div, w_lam_div);

    const double oms = 1.0 - sigma;
    rhs2.head(sf_.n) = oms * rx_;
    rhs2.segment(sf_.n, sf_.p) = -oms * ry_;
    rhs2.tail(sf_.m) = -oms * rz_ + w_lam_div;
    solve_kkt(rhs2, false, dx2, dy2, dz2);

    const double dtau = (oms * rt_ - bkap / tau_ + sf_.c.dot(dx2) +
                         sf_.b.dot(dy2) + sf_.h.dot(dz2)) /
                        dtau_denom;
    dx2 += dtau * dx1;
    dy2 += dtau * dy1;
    dz2 += dtau * dz1;

    Eigen::VectorXd w_dz;
    scale(dz2, w_dz);
    Eigen::VectorXd dsw = -(lam_div + w_dz);
    Eigen::VectorXd ds;
    scale(dsw, ds);
    const double dkap = -(bkap + kap_ * dtau) / tau_;

    const double alpha =
        std::min(kStepScale * max_step(ds, dz2, dtau, dkap), 1.0);
    last_step = alpha;

    x_ += alpha * dx2;
    y_ += alpha * dy2;
    z_ += alpha * dz2;
    s_ += alpha * ds;
    tau_ += alpha * dtau;
    kap_ += alpha * dkap;
  }

  // Undo scalings: x = diag(col) * xbar / tau.
  out.x = equil.col.cwiseProduct(x_) / tau_;
  out.iterations = iter;
  out.primal_residual = pres_;
  out.dual_residual = dres_;
  out.duality_gap = gap_ / (tau_ * tau_);
  out.relative_gap = relgap_;

  switch (verdict) {
    case Verdict::Optimal:
      out.status = SolveStatus::Optimal;
      break;
    case Verdict::PrimalInfeasible:
      out.status = SolveStatus::PrimalInfeasible;
      break;
    case Verdict::DualInfeasible:
      out.status = SolveStatus::DualInfeasible;
      break;
    case Verdict::NotYet: {
      // The run ended without a full-precision verdict; an infeasibility
      // certificate at reduced accuracy is still a proof worth reporting.
      const Verdict reduced = check_exit(kFeasInacc, kGapInacc, kGapInacc);
      if (reduced == Verdict::PrimalInfeasible) {
        out.status = SolveStatus::PrimalInfeasible;
      } else if (reduced == Verdict::DualInfeasible) {
        out.status = SolveStatus::DualInfeasible;
      } else if (!stalled && iter >= tol_.max_iter) {
        out.status = SolveStatus::IterLimit;
      } else {
        // Nearly converged iterates keep their residuals visible so callers
        // can decide whether to use them.
        out.status = SolveStatus::NumericalFailure;
      }
      break;
    }
  }
  return out;
}

}  // namespace

SolveResult solve(const Program& prog, const SolveTolerances& tol) {
  StandardForm sf = build_standard_form(prog);

  if (sf.m == 0 && sf.p == 0) {
    // No constraints at all: optimal at 0 when the objective is constant,
    // otherwise unbounded.
    SolveResult out;
    out.x = Eigen::VectorXd::Zero(sf.n);
    out.iterations = 0;
    if (sf.c.norm() == 0.0) {
      out.status = SolveStatus::Optimal;
      out.primal_residual = out.dual_residual = out.duality_gap = 0.0;
      out.relative_gap = 0.0;
      out.objective_value = prog.objective().eval(out.x);
    } else {
      out.status = SolveStatus::DualInfeasible;
    }
    return out;
  }

  Conelp solver(std::move(sf), tol);
  SolveResult res = solver.run();
  if (res.status == SolveStatus::Optimal) {
    res.objective_value = prog.objective().eval(res.x);
  }
  return res;
}

}  // namespace cobeam::conic
