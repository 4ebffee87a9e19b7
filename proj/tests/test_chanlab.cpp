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

using namespace cobeam;
using namespace cobeam::chanlab;

namespace {

GeometryConfig quiet_geometry() {
  GeometryConfig g;
  g.shadowing_std_db = 0.0;
  g.fading = Fading::Unit;
  return g;
}

}  // namespace

TEST_CASE("geometry validation") {
  GeometryConfig g;
  g.annulus_inner = 0.0;
  CHECK_THROWS_AS(ChannelGenerator{g}, ModelError);
  g = GeometryConfig{};
  g.pathloss_exp = 1.5;
  CHECK_THROWS_AS(ChannelGenerator{g}, ModelError);
}

TEST_CASE("bs layout: adjacent spacing equals inter_bs_distance") {
  GeometryConfig g;
  for (int cells : {1, 2, 3, 6}) {
    std::vector<double> x, y;
    bs_layout(g, cells, x, y);
    REQUIRE(static_cast<int>(x.size()) == cells);
    for (int m = 0; m + 1 < cells; ++m) {
      const double d = std::hypot(x[m + 1] - x[m], y[m + 1] - y[m]);
      CHECK(d == doctest::Approx(1000.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("drop_users: collapsed annulus pins distance at 500") {
  GeometryConfig g = quiet_geometry();
  g.annulus_inner = g.annulus_outer = 500.0;
  ChannelGenerator gen(g);
  const Scenario s = Scenario::uniform(3, 2, 1, 2, 10.0);
  const DistanceTable t = gen.drop_users(s);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 2; ++k)
      CHECK(t.distance(m, k, m) == doctest::Approx(500.0).epsilon(1e-12));
}

TEST_CASE("drop_users: same seed reproduces the distance matrix") {
  const Scenario s = Scenario::uniform(3, 2, 1, 2, 10.0);
  GeometryConfig g;
  g.seed = 99;
  ChannelGenerator a(g), b(g);
  const DistanceTable ta = a.drop_users(s), tb = b.drop_users(s);
  for (int mu = 0; mu < 3; ++mu)
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 3; ++m)
        CHECK(ta.distance(mu, k, m) == tb.distance(mu, k, m));
}

TEST_CASE("drop_users: mean squared own distance matches annulus moment") {
  // E[l^2] for uniform-in-area on [r_i, r_o] is (r_i^2 + r_o^2)/2.
  GeometryConfig g;
  g.seed = 5;
  ChannelGenerator gen(g);
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 10.0);
  double sum = 0.0;
  const int drops = 10000;
  for (int i = 0; i < drops; ++i) {
    const DistanceTable t = gen.drop_users(s);
    const double l = t.distance(0, 0, 0);
    sum += l * l;
  }
  const double analytic = (500.0 * 500.0 + 1000.0 * 1000.0) / 2.0;
  CHECK(sum / drops == doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("pathloss spot values are exact") {
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 10.0);
  GeometryConfig g = quiet_geometry();
  ChannelGenerator gen(g);
  DistanceTable t;
  t.n_cells = 1;
  t.n_users_per_cell = 1;
  t.bs_x = {0.0};
  t.bs_y = {0.0};
  SUBCASE("l = 200 gives amplitude exactly 1") {
    t.user_x = {200.0};
    t.user_y = {0.0};
    const ChannelSet ch = gen.generate_channels(s, t);
    CHECK(ch.h(0, 0, 0, 0)[0].real() == 1.0);
    CHECK(ch.h(0, 0, 0, 0)[1].real() == 1.0);
  }
  SUBCASE("l = 400 gives 2^-3.5") {
    t.user_x = {400.0};
    t.user_y = {0.0};
    const ChannelSet ch = gen.generate_channels(s, t);
    CHECK(ch.h(0, 0, 0, 0)[0].real() ==
          doctest::Approx(std::pow(2.0, -3.5)).epsilon(1e-14));
  }
  SUBCASE("power domain halves the exponent") {
    GeometryConfig gp = quiet_geometry();
    gp.pathloss_domain = PathlossDomain::Power;
    ChannelGenerator gen2(gp);
    t.user_x = {400.0};
    t.user_y = {0.0};
    const ChannelSet ch = gen2.generate_channels(s, t);
    CHECK(ch.h(0, 0, 0, 0)[0].real() ==
          doctest::Approx(std::pow(2.0, -1.75)).epsilon(1e-14));
  }
  SUBCASE("nonpositive distance is rejected") {
    t.user_x = {0.0};
    t.user_y = {0.0};
    CHECK_THROWS_AS(gen.generate_channels(s, t), ModelError);
  }
}

TEST_CASE("statistical moments: Rayleigh variance and shadowing std") {
  const Scenario s = Scenario::uniform(1, 1, 64, 2, 10.0);
  DistanceTable t;
  t.n_cells = 1;
  t.n_users_per_cell = 1;
  t.bs_x = {0.0};
  t.bs_y = {0.0};
  t.user_x = {200.0};  // unit path loss isolates the statistical factors
  t.user_y = {0.0};

  SUBCASE("E|Lambda|^2 = 1 within 2% over 1e5 draws") {
    GeometryConfig g;
    g.shadowing_std_db = 0.0;
    g.seed = 12;
    ChannelGenerator gen(g);
    double sum = 0.0;
    long count = 0;
    while (count < 100000) {
      const ChannelSet ch = gen.generate_channels(s, t);
      for (int n = 0; n < 64; ++n)
        for (int a = 0; a < 2; ++a) {
          sum += std::norm(ch.h(0, 0, 0, n)[a]);
          ++count;
        }
    }
    CHECK(sum / count == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("std of 10 log10(shadow) = 8 dB within 2% over 1e5 draws") {
    GeometryConfig g;
    g.fading = Fading::Unit;
    g.seed = 13;
    ChannelGenerator gen(g);
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
    while (count < 100000) {
      const ChannelSet ch = gen.generate_channels(s, t);
      for (int n = 0; n < 64; ++n) {
        const double db = 10.0 * std::log10(std::abs(ch.h(0, 0, 0, n)[0]));
        sum += db;
        sumsq += db * db;
        ++count;
      }
    }
    const double mean = sum / count;
    const double std = std::sqrt(sumsq / count - mean * mean);
    CHECK(std == doctest::Approx(8.0).epsilon(0.02));
    CHECK(std::abs(mean) < 0.1);
  }
}

TEST_CASE("monotonicity: larger distance gives smaller amplitude") {
  const Scenario s = Scenario::uniform(1, 1, 1, 2, 10.0);
  ChannelGenerator gen(quiet_geometry());
  DistanceTable t;
  t.n_cells = 1;
  t.n_users_per_cell = 1;
  t.bs_x = {0.0};
  t.bs_y = {0.0};
  double prev = 1e9;
  for (double l : {300.0, 500.0, 800.0, 1300.0}) {
    t.user_x = {l};
    t.user_y = {0.0};
    const double amp = std::abs(gen.generate_channels(s, t).h(0, 0, 0, 0)[0]);
    CHECK(amp < prev);
    prev = amp;
  }
}

TEST_CASE("determinism: same seed gives bit-identical channels") {
  const Scenario s = Scenario::uniform(2, 2, 3, 2, 10.0);
  GeometryConfig g;
  g.seed = 77;
  ChannelGenerator a(g), b(g);
  const ChannelSet ca = a.generate(s), cb = b.generate(s);
  std::ostringstream sa, sb;
  write_channels_csv(ca, sa);
  write_channels_csv(cb, sb);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("# cobeam-channels v1", 0) == 0);
}

TEST_CASE("frequency-flat shadowing repeats across subcarriers") {
  const Scenario s = Scenario::uniform(1, 1, 4, 1, 10.0);
  GeometryConfig g;
  g.fading = Fading::Unit;
  g.frequency_flat_shadowing = true;
  ChannelGenerator gen(g);
  DistanceTable t;
  t.n_cells = 1;
  t.n_users_per_cell = 1;
  t.bs_x = {0.0};
  t.bs_y = {0.0};
  t.user_x = {200.0};
  t.user_y = {0.0};
  const ChannelSet ch = gen.generate_channels(s, t);
  for (int n = 1; n < 4; ++n) {
    CHECK(ch.h(0, 0, 0, n)[0] == ch.h(0, 0, 0, 0)[0]);
  }
}
