// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "cobeam/model.hpp"

namespace cobeam::chanlab {

/// Small-scale fading model applied per antenna.
enum class Fading {
  Rayleigh,      // CN(0,1), the production model
  Unit,          // deterministic 1 (lab control)
  RealGaussian,  // N(0,1) real draws, for real-channel oracle instances
};

/// Whether the path-loss factor (ref/l)^exp multiplies the amplitude
/// directly or is interpreted as a power gain.
enum class PathlossDomain { Amplitude, Power };

/// Cell geometry and statistical channel parameters.  Defaults reproduce
/// the standard experiment: BSs 1000 m apart, users uniform in a 500-1000 m
/// annulus, path loss (200/l)^3.5, 8 dB log-normal shadowing, Rayleigh
/// fading.
struct GeometryConfig {
  double inter_bs_distance = 1000.0;  // meters
  double annulus_inner = 500.0;       // meters
  double annulus_outer = 1000.0;      // meters
  double pathloss_ref = 200.0;
  double pathloss_exp = 3.5;
  double shadowing_std_db = 8.0;  // std of 10*log10(shadow factor); 0 disables
  bool frequency_flat_shadowing = false;
  PathlossDomain pathloss_domain = PathlossDomain::Amplitude;
  Fading fading = Fading::Rayleigh;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Distances between every user and every base station, plus the layout
/// they came from.
struct DistanceTable {
  int n_cells = 0;
  int n_users_per_cell = 0;
  std::vector<double> bs_x, bs_y;
  std::vector<double> user_x, user_y;  // (cell, user) row-major

  double distance(int user_cell, int user, int bs) const;
};

/// Base station positions: cells on a regular polygon with adjacent
/// distance `inter_bs_distance` (a single cell sits at the origin).
void bs_layout(const GeometryConfig& g, int n_cells, std::vector<double>& x,
               std::vector<double>& y);

/// Seeded channel generator.  One generator per thread; outputs are
/// immutable.  The random stream is fixed and versioned (see rng_version())
/// so identical seeds give bit-identical outputs on any platform; ports in
/// other languages are expected to match only statistically.
class ChannelGenerator {
 public:
  explicit ChannelGenerator(GeometryConfig cfg);

  /// Drops users uniformly in area within the annulus of their serving BS
  /// and returns the full user-to-BS distance table.
  DistanceTable drop_users(const Scenario& scenario);

  /// h_kmn = (ref/l_km)^exp * shadow * fading, per antenna.
  ChannelSet generate_channels(const Scenario& scenario,
                               const DistanceTable& distances);

  /// drop_users followed by generate_channels.
  ChannelSet generate(const Scenario& scenario);

  const GeometryConfig& config() const { return cfg_; }

  /// Identifier of the random stream layout (algorithm + draw order).
  static const char* rng_version() { return "mt19937_64/box-muller/v1"; }

 private:
  double next_uniform();       // in [0, 1)
  double next_normal();        // N(0, 1), consumes one Box-Muller pair
  cplx next_complex_normal();  // CN(0, 1)
  double shadow_factor();

  GeometryConfig cfg_;
  std::mt19937_64 rng_;
};

/// One row per (user_cell, user, bs, subcarrier, antenna): Re, Im.
/// Schema versioned in the leading comment line.
void write_channels_csv(const ChannelSet& channels, std::ostream& os);

}  // namespace cobeam::chanlab
