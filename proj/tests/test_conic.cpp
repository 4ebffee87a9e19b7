// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cobeam/conic.hpp"

using namespace cobeam::conic;

TEST_CASE("lift_complex expands complex products") {
  SUBCASE("identity channel") {
    Program prog;
    ComplexVarVec f{{prog.add_var("x")}, {prog.add_var("y")}};
    Eigen::RowVectorXcd h(1);
    h << std::complex<double>(1.0, 0.0);
    auto [re, im] = lift_complex(h, f);
    Eigen::VectorXd pt(2);
    pt << 3.0, 5.0;
    CHECK(re.eval(pt) == doctest::Approx(3.0));
    CHECK(im.eval(pt) == doctest::Approx(5.0));
  }
  SUBCASE("rotation by i") {
    Program prog;
    ComplexVarVec f{{prog.add_var("x")}, {prog.add_var("y")}};
    Eigen::RowVectorXcd h(1);
    h << std::complex<double>(0.0, 1.0);
    auto [re, im] = lift_complex(h, f);
    Eigen::VectorXd pt(2);
    pt << 3.0, 5.0;
    CHECK(re.eval(pt) == doctest::Approx(-5.0));
    CHECK(im.eval(pt) == doctest::Approx(3.0));
  }
  SUBCASE("hand-expanded two-antenna case") {
    // h = [1+i, 2], f = (a+ib, c+id): Re = a-b+2c, Im = a+b+2d
    Program prog;
    ComplexVarVec f{{prog.add_var("a"), prog.add_var("c")},
                    {prog.add_var("b"), prog.add_var("d")}};
    Eigen::RowVectorXcd h(2);
    h << std::complex<double>(1.0, 1.0), std::complex<double>(2.0, 0.0);
    auto [re, im] = lift_complex(h, f);
    Eigen::VectorXd pt(4);  // a, c, b, d
    pt << 1.0, 2.0, 3.0, 4.0;
    CHECK(re.eval(pt) == doctest::Approx(1.0 - 3.0 + 2.0 * 2.0));
    CHECK(im.eval(pt) == doctest::Approx(1.0 + 3.0 + 2.0 * 4.0));
  }
  SUBCASE("length mismatch throws") {
    Program prog;
    ComplexVarVec f{{prog.add_var("x")}, {}};
    Eigen::RowVectorXcd h(1);
    h << 1.0;
    CHECK_THROWS_AS(lift_complex(h, f), ProgramError);
  }
}

TEST_CASE("property: lift_complex preserves |h f|^2") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 4);
    Program prog;
    ComplexVarVec fv;
    for (int t = 0; t < n; ++t) fv.re.push_back(prog.add_var("re"));
    for (int t = 0; t < n; ++t) fv.im.push_back(prog.add_var("im"));
    Eigen::RowVectorXcd h(n);
    Eigen::VectorXcd f(n);
    Eigen::VectorXd pt(2 * n);
    for (int t = 0; t < n; ++t) {
      h[t] = std::complex<double>(N(rng), N(rng));
      f[t] = std::complex<double>(N(rng), N(rng));
      pt[t] = f[t].real();
      pt[n + t] = f[t].imag();
    }
    auto [re, im] = lift_complex(h, fv);
    const double lifted =
        re.eval(pt) * re.eval(pt) + im.eval(pt) * im.eval(pt);
    const double direct = std::norm((h * f).value());
    CHECK(lifted == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("hyperbolic constraint arithmetic cases") {
  // Feasibility of the emitted SOC block at fixed numeric points.
  Program prog;
  const VarId z = prog.add_var("z");
  const VarId x = prog.add_var("x");
  const VarId y = prog.add_var("y");
  const SocId blk = prog.add_hyperbolic(LinExpr(z), LinExpr(x), LinExpr(y));

  auto violation = [&](double zv, double xv, double yv) {
    Eigen::VectorXd pt(3);
    pt << zv, xv, yv;
    return prog.soc_violation(blk, pt);
  };
  CHECK(violation(1.0, 1.0, 1.0) == doctest::Approx(0.0));  // boundary
  CHECK(violation(2.0, 1.0, 1.0) > 0.0);                    // 4 > 2
  CHECK(violation(1.0, 4.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  // sqrt(13) ~ 3.606 <= 5 with slack:
  {
    Eigen::VectorXd pt(3);
    pt << 1.0, 4.0, 1.0;
    double head = (LinExpr(x) + LinExpr(y)).eval(pt);
    double t0 = (2.0 * LinExpr(z)).eval(pt);
    double t1 = (LinExpr(x) - LinExpr(y)).eval(pt);
    CHECK(std::hypot(t0, t1) == doctest::Approx(std::sqrt(13.0)));
    CHECK(head == doctest::Approx(5.0));
  }
}

TEST_CASE("property: hyperbolic <-> SOC equivalence both directions") {
  // 10^4 random samples; z' z <= x y with x, y >= 0 must match the emitted
  // cone membership exactly, and vice versa.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  std::uniform_real_distribution<double> Upos(0.0, 3.0);
  int checked = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int nz = 1 + static_cast<int>(rng() % 3);
    Program prog;
    std::vector<LinExpr> zs;
    for (int i = 0; i < nz; ++i) zs.emplace_back(prog.add_var("z"));
    const VarId x = prog.add_var("x");
    const VarId y = prog.add_var("y");
    const SocId blk = prog.add_hyperbolic(
        std::span<const LinExpr>(zs.data(), zs.size()), LinExpr(x), LinExpr(y));

    Eigen::VectorXd pt(nz + 2);
    for (int i = 0; i < nz; ++i) pt[i] = U(rng);
    pt[nz] = Upos(rng);
    pt[nz + 1] = Upos(rng);

    const double zz = pt.head(nz).squaredNorm();
    const double xv = pt[nz];
    const double yv = pt[nz + 1];
    const bool hyperbolic_holds = zz <= xv * yv && xv >= 0.0 && yv >= 0.0;
    const bool soc_holds = prog.soc_violation(blk, pt) <= 1e-12 * (1.0 + zz);
    CHECK(hyperbolic_holds == soc_holds);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("add_soc: degenerate and malformed blocks") {
  Program prog;
  const VarId x = prog.add_var("x");
  SUBCASE("head constant, tail variable: |x| <= 1") {
    const SocId blk = prog.add_soc(LinExpr(1.0), {LinExpr(x)});
    Eigen::VectorXd pt(1);
    pt << 0.5;
    CHECK(prog.soc_violation(blk, pt) == 0.0);
    pt << 1.5;
    CHECK(prog.soc_violation(blk, pt) > 0.0);
  }
  SUBCASE("head 0, tail constant 1 is infeasible") {
    const SocId blk = prog.add_soc(LinExpr(0.0), {LinExpr(1.0)});
    Eigen::VectorXd pt(1);
    pt << 0.0;
    CHECK(prog.soc_violation(blk, pt) == doctest::Approx(1.0));
    // And the solver must agree:
    prog.maximize(LinExpr(x));
    prog.add_soc(LinExpr(2.0), {LinExpr(x)});
    const SolveResult res = solve(prog);
    CHECK(res.status == SolveStatus::PrimalInfeasible);
  }
  SUBCASE("empty tail degenerates to nonnegativity") {
    Program p2;
    const VarId t = p2.add_var("t");
    p2.add_soc(LinExpr(t), {});
    p2.maximize(-1.0 * LinExpr(t));
    const SolveResult res = solve(p2);
    REQUIRE(res.ok());
    CHECK(res.value(t) == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("out-of-range variable rejected") {
    Program p2;
    CHECK_THROWS_AS(p2.add_soc(LinExpr(VarId{3}), {}), ProgramError);
  }
}

TEST_CASE("solver reproduces closed-form optima") {
  SUBCASE("maximize -t subject to ||[1]|| <= t") {
    Program prog;
    const VarId t = prog.add_var("t");
    prog.add_soc(LinExpr(t), {LinExpr(1.0)});
    prog.maximize(-1.0 * LinExpr(t));
    const SolveResult res = solve(prog);
    REQUIRE(res.ok());
    CHECK(res.value(t) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.objective_value == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("maximize x subject to ||[x]|| <= 2") {
    Program prog;
    const VarId x = prog.add_var("x");
    prog.add_soc(LinExpr(2.0), {LinExpr(x)});
    prog.maximize(LinExpr(x));
    const SolveResult res = solve(prog);
    REQUIRE(res.ok());
    CHECK(res.value(x) == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("maximize x + y on the unit disk") {
    Program prog;
    const VarId x = prog.add_var("x");
    const VarId y = prog.add_var("y");
    prog.add_soc(LinExpr(1.0), {LinExpr(x), LinExpr(y)});
    prog.maximize(LinExpr(x) + LinExpr(y));
    const SolveResult res = solve(prog);
    REQUIRE(res.ok());
    CHECK(res.objective_value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(res.value(x) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-5));
    CHECK(res.value(y) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-5));
  }
}

TEST_CASE("solver handles equalities and detects unboundedness") {
  SUBCASE("equality pins the optimum") {
    Program prog;
    const VarId x = prog.add_var("x");
    const VarId y = prog.add_var("y");
    prog.add_equality(LinExpr(x) - LinExpr(y) - 1.0);
    prog.add_soc(LinExpr(2.0), {LinExpr(x), LinExpr(y)});
    prog.maximize(LinExpr(x));
    const SolveResult res = solve(prog);
    REQUIRE(res.ok());
    // max x with x = y + 1, x^2 + y^2 <= 4: x = (1 + sqrt(7))/2
    CHECK(res.value(x) ==
          doctest::Approx((1.0 + std::sqrt(7.0)) / 2.0).epsilon(1e-6));
  }
  SUBCASE("unbounded objective is dual infeasible") {
    Program prog;
    const VarId x = prog.add_var("x");
    prog.mark_nonneg(x);
    prog.maximize(LinExpr(x));
    const SolveResult res = solve(prog);
    CHECK(res.status == SolveStatus::DualInfeasible);
  }
  SUBCASE("no constraints at all") {
    Program prog;
    const VarId x = prog.add_var("x");
    prog.maximize(LinExpr(x));
    CHECK(solve(prog).status == SolveStatus::DualInfeasible);
  }
}

TEST_CASE("property: solve is monotone under relaxation") {
  // Removing a constraint never decreases the optimum.  Random bounded
  // programs over a box with extra random SOC constraints.
  std::mt19937_64 rng(23);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.5, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 3);
    Program full;
    Program relaxed;
    std::vector<VarId> xf, xr;
    LinExpr obj_f, obj_r;
    for (int i = 0; i < n; ++i) {
      xf.push_back(full.add_var("x"));
      xr.push_back(relaxed.add_var("x"));
      const double w = N(rng);
      obj_f += w * LinExpr(xf[i]);
      obj_r += w * LinExpr(xr[i]);
    }
    full.maximize(obj_f);
    relaxed.maximize(obj_r);
    // Shared box: ||x|| <= R keeps both problems bounded.
    const double radius = U(rng) * 3.0;
    {
      std::vector<LinExpr> tf, tr;
      for (int i = 0; i < n; ++i) {
        tf.emplace_back(xf[i]);
        tr.emplace_back(xr[i]);
      }
      full.add_soc(LinExpr(radius), tf);
      relaxed.add_soc(LinExpr(radius), tr);
    }
    // Extra constraints only on the full program.
    const int extra = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < extra; ++k) {
      std::vector<LinExpr> tf;
      for (int i = 0; i < n; ++i) tf.push_back(N(rng) * LinExpr(xf[i]));
      full.add_soc(LinExpr(U(rng)), tf);
    }
    const SolveResult rf = solve(full);
    const SolveResult rr = solve(relaxed);
    REQUIRE(rf.ok());
    REQUIRE(rr.ok());
    CHECK(rr.objective_value >=
          rf.objective_value - 1e-6 * (1.0 + std::abs(rf.objective_value)));
  }
}

TEST_CASE("solver residuals respect configured tolerances") {
  Program prog;
  const VarId x = prog.add_var("x");
  const VarId y = prog.add_var("y");
  prog.add_soc(LinExpr(1.0), {LinExpr(x), LinExpr(y)});
  prog.maximize(LinExpr(x) + 0.3 * LinExpr(y));
  const SolveResult res = solve(prog);
  REQUIRE(res.ok());
  CHECK(res.primal_residual < 1e-8);
  CHECK(res.dual_residual < 1e-8);
  CHECK((res.duality_gap < 1e-8 || res.relative_gap < 1e-8));
}

TEST_CASE("dump emits a readable standard form") {
  Program prog;
  const VarId x = prog.add_var("x");
  const VarId y = prog.add_var("y");
  prog.maximize(2.0 * LinExpr(x));
  prog.add_equality(LinExpr(x) - LinExpr(y));
  prog.add_nonneg(LinExpr(y) - 0.5);
  prog.add_soc(LinExpr(3.0), {LinExpr(x), LinExpr(y)});
  const std::string text = prog.dump();
  CHECK(text.find("maximize 2*x") != std::string::npos);
  CHECK(text.find("eq[0]") != std::string::npos);
  CHECK(text.find("lp[0]") != std::string::npos);
  CHECK(text.find("soc[0]") != std::string::npos);
}
