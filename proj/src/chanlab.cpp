// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/chanlab.hpp"

#include <cmath>
#include <ostream>

namespace cobeam::chanlab {

void GeometryConfig::validate() const {
  if (!(annulus_outer >= annulus_inner) || !(annulus_inner > 0.0)) {
    throw ModelError("geometry: need outer radius >= inner radius > 0");
  }
  if (!(pathloss_exp > 2.0)) {
    throw ModelError("geometry: pathloss exponent must exceed 2");
  }
  if (!(pathloss_ref > 0.0) || !(inter_bs_distance > 0.0)) {
    throw ModelError("geometry: reference distance and BS spacing must be positive");
  }
  if (shadowing_std_db < 0.0) {
    throw ModelError("geometry: shadowing std must be nonnegative");
  }
}

double DistanceTable::distance(int user_cell, int user, int bs) const {
  const std::size_t u = static_cast<std::size_t>(user_cell) * n_users_per_cell + user;
  const double dx = user_x.at(u) - bs_x.at(bs);
  const double dy = user_y.at(u) - bs_y.at(bs);
  return std::hypot(dx, dy);
}

void bs_layout(const GeometryConfig& g, int n_cells, std::vector<double>& x,
               std::vector<double>& y) {
  x.assign(n_cells, 0.0);
  y.assign(n_cells, 0.0);
  if (n_cells == 1) return;
  if (n_cells == 2) {
    x[1] = g.inter_bs_distance;
    return;
  }
  // Regular polygon with side length inter_bs_distance.
  const double r = g.inter_bs_distance / (2.0 * std::sin(M_PI / n_cells));
  for (int m = 0; m < n_cells; ++m) {
    const double phi = 2.0 * M_PI * m / n_cells;
    x[m] = r * std::cos(phi);
    y[m] = r * std::sin(phi);
  }
}

ChannelGenerator::ChannelGenerator(GeometryConfig cfg)
    : cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
}

double ChannelGenerator::next_uniform() {
  // 53-bit mantissa in [0, 1).
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double ChannelGenerator::next_normal() {
  // Box-Muller; the sine branch of the pair is discarded so every normal
  // draw consumes exactly two uniforms (draw order is part of the stream
  // contract, see rng_version()).
  const double u1 = 1.0 - next_uniform();  // (0, 1]
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

cplx ChannelGenerator::next_complex_normal() {
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  // Both Box-Muller branches, scaled so E|x|^2 = 1.
  return cplx(r * std::cos(2.0 * M_PI * u2) / std::sqrt(2.0),
              r * std::sin(2.0 * M_PI * u2) / std::sqrt(2.0));
}

double ChannelGenerator::shadow_factor() {
  if (cfg_.shadowing_std_db == 0.0) return 1.0;
  return std::pow(10.0, cfg_.shadowing_std_db * next_normal() / 10.0);
}

DistanceTable ChannelGenerator::drop_users(const Scenario& scenario) {
  DistanceTable t;
  t.n_cells = scenario.n_cells();
  t.n_users_per_cell = scenario.n_users_per_cell();
  bs_layout(cfg_, t.n_cells, t.bs_x, t.bs_y);

  const double ri2 = cfg_.annulus_inner * cfg_.annulus_inner;
  const double ro2 = cfg_.annulus_outer * cfg_.annulus_outer;
  for (int m = 0; m < t.n_cells; ++m) {
    for (int k = 0; k < t.n_users_per_cell; ++k) {
      // Uniform in area over the serving annulus.
      const double r = std::sqrt(ri2 + next_uniform() * (ro2 - ri2));
      const double phi = 2.0 * M_PI * next_uniform();
      t.user_x.push_back(t.bs_x[m] + r * std::cos(phi));
      t.user_y.push_back(t.bs_y[m] + r * std::sin(phi));
    }
  }
  return t;
}

ChannelSet ChannelGenerator::generate_channels(const Scenario& scenario,
                                               const DistanceTable& distances) {
  if (distances.n_cells != scenario.n_cells() ||
      distances.n_users_per_cell != scenario.n_users_per_cell()) {
    throw ModelError("generate_channels: distance table does not match scenario");
  }
  ChannelSet out(scenario);
  const double amp_exp = cfg_.pathloss_domain == PathlossDomain::Amplitude
                             ? cfg_.pathloss_exp
                             : 0.5 * cfg_.pathloss_exp;
  for (int mu = 0; mu < scenario.n_cells(); ++mu) {
    for (int k = 0; k < scenario.n_users_per_cell(); ++k) {
      for (int m = 0; m < scenario.n_cells(); ++m) {
        const double l = distances.distance(mu, k, m);
        if (!(l > 0.0)) {
          throw ModelError("generate_channels: nonpositive distance for user (" +
                           std::to_string(mu) + "," + std::to_string(k) +
                           ") to BS " + std::to_string(m));
        }
        const double pathloss = std::pow(cfg_.pathloss_ref / l, amp_exp);
        double flat_shadow = 1.0;
        if (cfg_.frequency_flat_shadowing) flat_shadow = shadow_factor();
        for (int n = 0; n < scenario.n_sub(); ++n) {
          const double shadow =
              cfg_.frequency_flat_shadowing ? flat_shadow : shadow_factor();
          Eigen::RowVectorXcd h(scenario.n_tx());
          for (int t = 0; t < scenario.n_tx(); ++t) {
            cplx fade;
            switch (cfg_.fading) {
              case Fading::Rayleigh: fade = next_complex_normal(); break;
              case Fading::Unit: fade = 1.0; break;
              case Fading::RealGaussian: fade = next_normal(); break;
            }
            h[t] = pathloss * shadow * fade;
          }
          out.set(mu, k, m, n, std::move(h));
        }
      }
    }
  }
  return out;
}

ChannelSet ChannelGenerator::generate(const Scenario& scenario) {
  const DistanceTable t = drop_users(scenario);
  return generate_channels(scenario, t);
}

void write_channels_csv(const ChannelSet& channels, std::ostream& os) {
  os << "# cobeam-channels v1\n";
  os << "user_cell,user,bs,subcarrier,antenna,re,im\n";
  os.precision(17);
  for (int mu = 0; mu < channels.n_cells(); ++mu)
    for (int k = 0; k < channels.n_users_per_cell(); ++k)
      for (int m = 0; m < channels.n_cells(); ++m)
        for (int n = 0; n < channels.n_sub(); ++n) {
          const Eigen::RowVectorXcd& h = channels.h(mu, k, m, n);
          for (int t = 0; t < channels.n_tx(); ++t) {
            os << mu << ',' << k << ',' << m << ',' << n << ',' << t << ','
               << h[t].real() << ',' << h[t].imag() << '\n';
          }
        }
}

}  // namespace cobeam::chanlab
