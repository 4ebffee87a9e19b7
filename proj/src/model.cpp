// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "cobeam/model.hpp"

#include <cmath>
#include <numeric>

namespace cobeam {

Scenario::Scenario(int n_cells, int n_users_per_cell, int n_sub, int n_tx,
                   std::vector<double> p_max, std::vector<double> weights,
                   std::vector<int> assignment)
    : n_cells_(n_cells),
      n_users_per_cell_(n_users_per_cell),
      n_sub_(n_sub),
      n_tx_(n_tx),
      p_max_(std::move(p_max)),
      weights_(std::move(weights)),
      assignment_(std::move(assignment)) {
  if (n_cells_ < 1 || n_users_per_cell_ < 1 || n_sub_ < 1 || n_tx_ < 1) {
    throw ModelError("scenario: all dimensions must be >= 1");
  }
  if (static_cast<int>(p_max_.size()) != n_cells_) {
    throw ModelError("scenario: p_max must have one entry per cell, got " +
                     std::to_string(p_max_.size()));
  }
  for (int m = 0; m < n_cells_; ++m) {
    if (!(p_max_[m] > 0.0)) {
      throw ModelError("scenario: p_max[" + std::to_string(m) +
                       "] must be positive");
    }
  }
  if (static_cast<int>(weights_.size()) != n_cells_ * n_users_per_cell_) {
    throw ModelError("scenario: weights must have one entry per (cell, user)");
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] < 0.0 || !std::isfinite(weights_[i])) {
      throw ModelError("scenario: weight[" + std::to_string(i) +
                       "] must be finite and nonnegative");
    }
    any_positive |= weights_[i] > 0.0;
  }
  if (!any_positive) {
    throw ModelError("scenario: at least one weight must be positive");
  }
  if (static_cast<int>(assignment_.size()) != n_cells_ * n_sub_) {
    throw ModelError(
        "scenario: assignment must be total over (cell, subcarrier)");
  }
  for (int m = 0; m < n_cells_; ++m) {
    for (int n = 0; n < n_sub_; ++n) {
      const int k = assignment_[static_cast<std::size_t>(m) * n_sub_ + n];
      if (k < 0 || k >= n_users_per_cell_) {
        throw ModelError("scenario: assignment(" + std::to_string(m) + "," +
                         std::to_string(n) + ") = " + std::to_string(k) +
                         " is not a user of the cell");
      }
    }
  }
}

LinkRef Scenario::link(int j) const {
  if (j < 0 || j >= n_links()) {
    throw ModelError("scenario: link index " + std::to_string(j) +
                     " out of range");
  }
  const int cell = j / n_sub_;
  const int sub = j % n_sub_;
  return LinkRef{cell, sub, assigned_user(cell, sub)};
}

Scenario Scenario::uniform(int n_cells, int n_users_per_cell, int n_sub,
                           int n_tx, double p_max_watts) {
  std::vector<double> p(n_cells, p_max_watts);
  std::vector<double> w(static_cast<std::size_t>(n_cells) * n_users_per_cell,
                        1.0);
  std::vector<int> assign(static_cast<std::size_t>(n_cells) * n_sub);
  for (int m = 0; m < n_cells; ++m) {
    for (int n = 0; n < n_sub; ++n) {
      assign[static_cast<std::size_t>(m) * n_sub + n] = n % n_users_per_cell;
    }
  }
  return Scenario(n_cells, n_users_per_cell, n_sub, n_tx, std::move(p),
                  std::move(w), std::move(assign));
}

ChannelSet::ChannelSet(int n_cells, int n_users_per_cell, int n_sub, int n_tx)
    : n_cells_(n_cells),
      n_users_per_cell_(n_users_per_cell),
      n_sub_(n_sub),
      n_tx_(n_tx) {
  const std::size_t total = static_cast<std::size_t>(n_cells) *
                            n_users_per_cell * n_cells * n_sub;
  rows_.assign(total, Eigen::RowVectorXcd::Zero(n_tx));
}

std::size_t ChannelSet::index(int user_cell, int user, int bs, int sub) const {
  if (user_cell < 0 || user_cell >= n_cells_ || user < 0 ||
      user >= n_users_per_cell_ || bs < 0 || bs >= n_cells_ || sub < 0 ||
      sub >= n_sub_) {
    throw ModelError("channels: index (" + std::to_string(user_cell) + "," +
                     std::to_string(user) + "," + std::to_string(bs) + "," +
                     std::to_string(sub) + ") out of range");
  }
  return ((static_cast<std::size_t>(user_cell) * n_users_per_cell_ + user) *
              n_cells_ +
          bs) *
             n_sub_ +
         sub;
}

void ChannelSet::set(int user_cell, int user, int bs, int sub,
                     Eigen::RowVectorXcd v) {
  if (v.size() != n_tx_) {
    throw ModelError("channels: vector for (" + std::to_string(user_cell) +
                     "," + std::to_string(user) + "," + std::to_string(bs) +
                     "," + std::to_string(sub) + ") has length " +
                     std::to_string(v.size()) + ", expected " +
                     std::to_string(n_tx_));
  }
  rows_[index(user_cell, user, bs, sub)] = std::move(v);
}

bool ChannelSet::all_finite() const {
  for (const auto& r : rows_) {
    if (!r.allFinite()) return false;
  }
  return true;
}

bool ChannelSet::is_real(double tol) const {
  for (const auto& r : rows_) {
    for (Eigen::Index t = 0; t < r.size(); ++t) {
      if (std::abs(r[t].imag()) > tol) return false;
    }
  }
  return true;
}

BeamformerSet::BeamformerSet(int n_links, int n_tx) : n_tx_(n_tx) {
  if (n_links < 0 || n_tx < 1) {
    throw ModelError("beamformers: invalid dimensions");
  }
  beams_.assign(n_links, Eigen::VectorXcd::Zero(n_tx));
}

double BeamformerSet::cell_power(const Scenario& s, int cell) const {
  double p = 0.0;
  for (int n = 0; n < s.n_sub(); ++n) {
    p += beams_.at(s.link_index(cell, n)).squaredNorm();
  }
  return p;
}

Eigen::VectorXd BeamformerSet::per_cell_power(const Scenario& s) const {
  Eigen::VectorXd p(s.n_cells());
  for (int m = 0; m < s.n_cells(); ++m) p[m] = cell_power(s, m);
  return p;
}

bool BeamformerSet::power_feasible(const Scenario& s, double tol) const {
  for (int m = 0; m < s.n_cells(); ++m) {
    if (cell_power(s, m) > s.p_max(m) + tol) return false;
  }
  return true;
}

namespace {

void check_dimensions(const Scenario& scenario, const ChannelSet& channels,
                      const BeamformerSet& beams) {
  if (channels.n_cells() != scenario.n_cells() ||
      channels.n_users_per_cell() != scenario.n_users_per_cell() ||
      channels.n_sub() != scenario.n_sub() ||
      channels.n_tx() != scenario.n_tx()) {
    throw ModelError("evaluate: channel set sized (" +
                     std::to_string(channels.n_cells()) + " cells, " +
                     std::to_string(channels.n_users_per_cell()) + " users, " +
                     std::to_string(channels.n_sub()) + " subcarriers, " +
                     std::to_string(channels.n_tx()) +
                     " antennas) does not match scenario");
  }
  if (beams.n_links() != scenario.n_links()) {
    throw ModelError("evaluate: beamformer set has " +
                     std::to_string(beams.n_links()) + " links, scenario has " +
                     std::to_string(scenario.n_links()));
  }
  if (beams.n_tx() != scenario.n_tx()) {
    throw ModelError("evaluate: beamformers have " +
                     std::to_string(beams.n_tx()) + " antennas, scenario has " +
                     std::to_string(scenario.n_tx()));
  }
}

}  // namespace

double compute_sinr(const Scenario& scenario, const ChannelSet& channels,
                    const BeamformerSet& beams, int j) {
  const LinkRef l = scenario.link(j);
  // Plain (unconjugated) product h * f: h is a row vector, f a column.
  const cplx own = (channels.link_channel(l, l.cell) * beams.f(j)).value();
  double interference = 0.0;
  for (int mi = 0; mi < scenario.n_cells(); ++mi) {
    if (mi == l.cell) continue;
    const int ji = scenario.link_index(mi, l.sub);
    const cplx cross = (channels.link_channel(l, mi) * beams.f(ji)).value();
    interference += std::norm(cross);
  }
  return std::norm(own) / (1.0 + interference);
}

RateReport evaluate(const Scenario& scenario, const ChannelSet& channels,
                    const BeamformerSet& beams) {
  check_dimensions(scenario, channels, beams);
  const int J = scenario.n_links();
  RateReport report;
  report.sinr.resize(J);
  report.rate_bits.resize(J);
  for (int j = 0; j < J; ++j) {
    report.sinr[j] = compute_sinr(scenario, channels, beams, j);
    report.rate_bits[j] = std::log2(1.0 + report.sinr[j]);
    report.weighted_sum_rate += scenario.link_weight(j) * report.rate_bits[j];
  }
  report.per_cell_power = beams.per_cell_power(scenario);
  return report;
}

}  // namespace cobeam
