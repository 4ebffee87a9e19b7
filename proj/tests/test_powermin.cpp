// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cobeam/chanlab.hpp"
#include "cobeam/powermin.hpp"
#include "cobeam/wsrm.hpp"

using namespace cobeam;
using namespace cobeam::powermin;

namespace {

ChannelSet desk_channels(const Scenario& s, std::uint64_t seed) {
  chanlab::GeometryConfig g;
  g.seed = seed;
  chanlab::ChannelGenerator gen(g);
  return gen.generate(s);
}

SinrTargets uniform_targets(const Scenario& s, double gamma) {
  SinrTargets t;
  t.gamma = Eigen::VectorXd::Constant(s.n_links(), gamma);
  return t;
}

}  // namespace

TEST_CASE("powermin: single-cell closed form Gamma/||h||^2") {
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 100.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
  const PowerMinResult r =
      solve_powermin(s, ch, uniform_targets(s, 4.0), ObjectiveMode::TotalPower);
  REQUIRE(r.ok());
  CHECK(r.total_power == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::abs(r.beams.f(0)[0]) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("powermin: vanishing targets need vanishing power") {
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 100.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
  const PowerMinResult r = solve_powermin(s, ch, uniform_targets(s, 1e-9),
                                          ObjectiveMode::TotalPower);
  REQUIRE(r.ok());
  CHECK(r.total_power < 1e-7);
}

TEST_CASE("powermin: decoupled cells compose closed forms") {
  // Cell powers 4 and 9: total 13, min-max xi = 3.
  const Scenario s = Scenario::uniform(2, 1, 1, 2, 100.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
  ch.set(1, 0, 1, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
  SinrTargets t;
  t.gamma = (Eigen::VectorXd(2) << 4.0, 9.0).finished();
  const PowerMinResult total =
      solve_powermin(s, ch, t, ObjectiveMode::TotalPower);
  REQUIRE(total.ok());
  CHECK(total.total_power == doctest::Approx(13.0).epsilon(1e-6));
  const PowerMinResult minmax =
      solve_powermin(s, ch, t, ObjectiveMode::MinMaxCellPower);
  REQUIRE(minmax.ok());
  CHECK(minmax.objective == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(minmax.per_cell_power.maxCoeff() == doctest::Approx(9.0).epsilon(1e-5));
}

TEST_CASE("powermin: SINR constraints are active at the optimum") {
  const Scenario s = Scenario::uniform(3, 2, 2, 2, 100.0);
  const ChannelSet ch = desk_channels(s, 31);
  // Feasible targets from a converged WSRM run.
  const wsrm::SpcaResult w = wsrm::spca_solve(s, ch);
  const SinrTargets t = SinrTargets::from_report(w.report, 1e-9);
  const PowerMinResult r = solve_powermin(s, ch, t, ObjectiveMode::TotalPower);
  REQUIRE(r.ok());
  for (int j = 0; j < s.n_links(); ++j) {
    const double achieved = compute_sinr(s, ch, r.beams, j);
    CHECK(achieved >= t.gamma[j] * (1.0 - 1e-6));
    CHECK(achieved == doctest::Approx(t.gamma[j]).epsilon(1e-5));
  }
}

TEST_CASE("powermin: round trip never beats WSRM power") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    const Scenario s = Scenario::uniform(3, 2, 2, 2, 100.0);
    const ChannelSet ch = desk_channels(s, seed);
    const wsrm::SpcaResult w = wsrm::spca_solve(s, ch);
    const SinrTargets t = SinrTargets::from_report(w.report, 1e-9);
    const PowerMinResult r =
        solve_powermin(s, ch, t, ObjectiveMode::TotalPower);
    REQUIRE(r.ok());
    CHECK(r.total_power <= w.report.per_cell_power.sum() + 1e-6);
    const PowerMinResult mm =
        solve_powermin(s, ch, t, ObjectiveMode::MinMaxCellPower);
    REQUIRE(mm.ok());
    const double wsrm_max = w.report.per_cell_power.maxCoeff();
    CHECK(mm.per_cell_power.maxCoeff() <=
          wsrm_max + 1e-6 * (1.0 + wsrm_max));
  }
}

TEST_CASE("powermin: inflated targets on an interference-limited scenario") {
  // With 3 cells and 2 antennas, no beam can null both cross users, so the
  // achievable SINR region is bounded and a x1e6 inflation must land
  // outside it.
  const Scenario s = Scenario::uniform(3, 2, 2, 2, 100.0);
  const ChannelSet ch = desk_channels(s, 13);
  const wsrm::SpcaResult w = wsrm::spca_solve(s, ch);
  SinrTargets t = SinrTargets::from_report(w.report, 1e-9);
  t.gamma *= 1e6;
  const PowerMinResult r = solve_powermin(s, ch, t, ObjectiveMode::TotalPower);
  CHECK(r.status == PowerMinStatus::Infeasible);
}

TEST_CASE("powermin: monotone in each target") {
  const Scenario s = Scenario::uniform(2, 1, 1, 2, 100.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.3).finished());
  ch.set(0, 0, 1, 0, (Eigen::RowVectorXcd(2) << 0.4, -0.2).finished());
  ch.set(1, 0, 1, 0, (Eigen::RowVectorXcd(2) << 0.8, -0.5).finished());
  ch.set(1, 0, 0, 0, (Eigen::RowVectorXcd(2) << 0.1, 0.6).finished());
  SinrTargets t = uniform_targets(s, 0.8);
  const PowerMinResult base =
      solve_powermin(s, ch, t, ObjectiveMode::TotalPower);
  REQUIRE(base.ok());
  for (int j = 0; j < s.n_links(); ++j) {
    SinrTargets up = t;
    up.gamma[j] *= 1.5;
    const PowerMinResult r =
        solve_powermin(s, ch, up, ObjectiveMode::TotalPower);
    REQUIRE(r.ok());
    CHECK(r.total_power >= base.total_power - 1e-8);
  }
}

TEST_CASE("powermin: noise-limited scale consistency") {
  // Scaling the channels by s scales the optimal power by 1/s^2.
  const Scenario sc = Scenario::uniform(1, 1, 2, 2, 100.0);
  ChannelSet ch(sc);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 0.7, 0.2).finished());
  ch.set(0, 0, 0, 1, (Eigen::RowVectorXcd(2) << 0.1, 0.9).finished());
  const SinrTargets t = uniform_targets(sc, 2.0);
  const PowerMinResult base =
      solve_powermin(sc, ch, t, ObjectiveMode::TotalPower);
  REQUIRE(base.ok());
  const double scale = 3.0;
  ChannelSet scaled(sc);
  scaled.set(0, 0, 0, 0, scale * ch.h(0, 0, 0, 0));
  scaled.set(0, 0, 0, 1, scale * ch.h(0, 0, 0, 1));
  const PowerMinResult r =
      solve_powermin(sc, scaled, t, ObjectiveMode::TotalPower);
  REQUIRE(r.ok());
  CHECK(r.total_power ==
        doctest::Approx(base.total_power / (scale * scale)).epsilon(1e-6));
}

TEST_CASE("powermin: target validation") {
  const Scenario s = Scenario::uniform(2, 1, 1, 2, 100.0);
  const ChannelSet ch = desk_channels(s, 1);
  SUBCASE("missing target") {
    SinrTargets t;
    t.gamma = Eigen::VectorXd::Constant(1, 1.0);
    CHECK_THROWS_AS(build_powermin(s, ch, t, ObjectiveMode::TotalPower),
                    ModelError);
  }
  SUBCASE("nonpositive target") {
    SinrTargets t = uniform_targets(s, 1.0);
    t.gamma[0] = 0.0;
    CHECK_THROWS_AS(build_powermin(s, ch, t, ObjectiveMode::TotalPower),
                    ModelError);
  }
}

TEST_CASE("powermin: results csv") {
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 100.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
  const SinrTargets t = uniform_targets(s, 4.0);
  const PowerMinResult r = solve_powermin(s, ch, t);
  std::ostringstream os;
  write_powermin_csv(s, ch, t, r, os);
  CHECK(os.str().rfind("# cobeam-powermin v1", 0) == 0);
  CHECK(os.str().find("Optimal") != std::string::npos);
}
