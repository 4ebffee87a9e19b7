// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cobeam/chanlab.hpp"
#include "cobeam/oracle.hpp"

using namespace cobeam;
using namespace cobeam::oracle;

namespace {

ChannelSet real_channels(const Scenario& s, std::uint64_t seed) {
  chanlab::GeometryConfig g;
  g.seed = seed;
  g.fading = chanlab::Fading::RealGaussian;
  chanlab::ChannelGenerator gen(g);
  return gen.generate(s);
}

}  // namespace

TEST_CASE("closed_form_single_link") {
  Eigen::RowVectorXcd h(2);
  h << 0.6, 0.8;  // unit norm
  SUBCASE("||h|| = 1, P = 4 gives log2(5)") {
    const SingleLinkOptimum o = closed_form_single_link(h, 4.0);
    CHECK(o.rate == doctest::Approx(std::log2(5.0)).epsilon(1e-12));
    CHECK(o.f.norm() == doctest::Approx(2.0));
  }
  SUBCASE("P = 0 gives rate 0") {
    CHECK(closed_form_single_link(h, 0.0).rate == doctest::Approx(0.0));
  }
  SUBCASE("doubling P from 4 to 8") {
    CHECK(closed_form_single_link(h, 8.0).rate ==
          doctest::Approx(std::log2(9.0)).epsilon(1e-12));
  }
  SUBCASE("zero channel rejected") {
    Eigen::RowVectorXcd z = Eigen::RowVectorXcd::Zero(2);
    CHECK_THROWS_AS(closed_form_single_link(z, 1.0), ModelError);
  }
}

TEST_CASE("grid_wsrm: no interference reaches the closed form") {
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 4.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 0.6, 0.8).finished());
  const GridResult g = grid_wsrm(s, ch);
  CHECK(g.wsr == doctest::Approx(std::log2(5.0)).epsilon(1e-3));
  CHECK(g.wsr <= std::log2(5.0) + 1e-12);  // never exceeds the true optimum
}

TEST_CASE("grid_wsrm: symmetric two-cell instance splits power evenly") {
  const Scenario s = Scenario::uniform(2, 1, 1, 2, 4.0);
  ChannelSet ch(s);
  const auto own = (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished();
  const auto cross = (Eigen::RowVectorXcd(2) << 0.4, 0.0).finished();
  ch.set(0, 0, 0, 0, own);
  ch.set(0, 0, 1, 0, cross);
  ch.set(1, 0, 1, 0, own);
  ch.set(1, 0, 0, 0, cross);
  const GridResult g = grid_wsrm(s, ch);
  const double p0 = g.beams.f(0).squaredNorm();
  const double p1 = g.beams.f(1).squaredNorm();
  CHECK(p0 == doctest::Approx(p1).epsilon(1e-2));
}

TEST_CASE("grid_wsrm: refinement self-consistency under 0.5%") {
  const Scenario s = Scenario::uniform(2, 1, 1, 2, 4.0);
  const ChannelSet ch = real_channels(s, 8);
  GridSpec coarse;
  coarse.refine_rounds = 2;  // effective ~ 100 steps
  GridSpec fine;
  fine.refine_rounds = 4;  // effective > 1000 steps
  CHECK(coarse.effective_steps() > 90.0);
  CHECK(fine.effective_steps() > 1000.0);
  const double a = grid_wsrm(s, ch, coarse).wsr;
  const double b = grid_wsrm(s, ch, fine).wsr;
  CHECK(std::abs(a - b) <= 0.005 * std::max(a, b));
}

TEST_CASE("grid_wsrm: determinism and decoupled upper bound") {
  const Scenario s = Scenario::uniform(2, 1, 1, 2, 4.0);
  ChannelSet ch(s);
  ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 0.9, 0.3).finished());
  ch.set(1, 0, 1, 0, (Eigen::RowVectorXcd(2) << 0.2, 1.1).finished());
  const GridResult a = grid_wsrm(s, ch);
  const GridResult b = grid_wsrm(s, ch);
  CHECK(a.wsr == b.wsr);
  // Decoupled: never above the sum of single-link capacities.
  const double cap = closed_form_single_link(ch.h(0, 0, 0, 0), 4.0).rate +
                     closed_form_single_link(ch.h(1, 0, 1, 0), 4.0).rate;
  CHECK(a.wsr <= cap + 1e-9);
  CHECK(a.wsr == doctest::Approx(cap).epsilon(1e-3));
}

TEST_CASE("grid_wsrm: guards its preconditions") {
  SUBCASE("too many cells") {
    const Scenario s = Scenario::uniform(3, 1, 1, 2, 4.0);
    ChannelSet ch(s);
    CHECK_THROWS_AS(grid_wsrm(s, ch), ModelError);
  }
  SUBCASE("complex channels") {
    const Scenario s = Scenario::uniform(1, 1, 1, 2, 4.0);
    ChannelSet ch(s);
    ch.set(0, 0, 0, 0,
           (Eigen::RowVectorXcd(2) << cplx(1.0, 0.5), 0.0).finished());
    CHECK_THROWS_AS(grid_wsrm(s, ch), ModelError);
  }
  SUBCASE("oversized grid") {
    const Scenario s = Scenario::uniform(2, 1, 1, 2, 4.0);
    ChannelSet ch(s);
    ch.set(0, 0, 0, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
    ch.set(1, 0, 1, 0, (Eigen::RowVectorXcd(2) << 1.0, 0.0).finished());
    GridSpec huge;
    huge.angle_steps = 64;
    huge.power_steps = 64;
    CHECK_THROWS_AS(grid_wsrm(s, ch, huge), ModelError);
  }
  SUBCASE("bad spec") {
    GridSpec g;
    g.angle_steps = 1;
    CHECK_THROWS_AS(g.validate(), ModelError);
  }
}
