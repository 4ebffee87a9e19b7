// cobeam - coordinated multicell downlink beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cobeam {

using cplx = std::complex<double>;

/// Thrown when scenario data violates a structural invariant.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One downlink transmission link: cell `cell` serves user `user` on
/// subcarrier `sub`.  Links are enumerated row-major over (cell, subcarrier);
/// that ordering is part of the public contract so traces are reproducible.
struct LinkRef {
  int cell;
  int sub;
  int user;
};

/// Static description of the multicell OFDMA network: topology, per-cell
/// power budgets, user weights and the subcarrier-to-user assignment.
///
/// The assignment is total and non-overlapping: every (cell, subcarrier)
/// pair carries exactly one user of that cell, so there is no intra-cell
/// interference and the set of active links V has n_cells * n_sub members.
class Scenario {
 public:
  Scenario(int n_cells, int n_users_per_cell, int n_sub, int n_tx,
           std::vector<double> p_max, std::vector<double> weights,
           std::vector<int> assignment);

  int n_cells() const { return n_cells_; }
  int n_users_per_cell() const { return n_users_per_cell_; }
  int n_sub() const { return n_sub_; }
  int n_tx() const { return n_tx_; }

  double p_max(int cell) const { return p_max_.at(cell); }
  const std::vector<double>& p_max() const { return p_max_; }

  double weight(int cell, int user) const {
    return weights_.at(static_cast<std::size_t>(cell) * n_users_per_cell_ + user);
  }
  /// Weight of the user served on link j (alpha_kmn = w_km for all n).
  double link_weight(int j) const {
    const LinkRef l = link(j);
    return weight(l.cell, l.user);
  }

  /// phi(m, n): index of the user of cell m scheduled on subcarrier n.
  int assigned_user(int cell, int sub) const {
    return assignment_.at(static_cast<std::size_t>(cell) * n_sub_ + sub);
  }

  /// Number of active links J = n_cells * n_sub.
  int n_links() const { return n_cells_ * n_sub_; }

  /// j-th member of V under the row-major (cell, subcarrier) enumeration.
  LinkRef link(int j) const;
  /// Inverse of link(): j for a (cell, subcarrier) pair.
  int link_index(int cell, int sub) const { return cell * n_sub_ + sub; }

  /// Convenience: uniform-weight scenario with round-robin assignment.
  static Scenario uniform(int n_cells, int n_users_per_cell, int n_sub,
                          int n_tx, double p_max_watts);

 private:
  int n_cells_;
  int n_users_per_cell_;
  int n_sub_;
  int n_tx_;
  std::vector<double> p_max_;
  std::vector<double> weights_;    // (cell, user) row-major
  std::vector<int> assignment_;    // (cell, subcarrier) row-major
};

/// Complex channel row vectors h_kmn for every (user, BS, subcarrier)
/// combination, own and interfering.  Values are dimensionless amplitude
/// gains; immutable once filled.
class ChannelSet {
 public:
  ChannelSet(int n_cells, int n_users_per_cell, int n_sub, int n_tx);
  explicit ChannelSet(const Scenario& s)
      : ChannelSet(s.n_cells(), s.n_users_per_cell(), s.n_sub(), s.n_tx()) {}

  /// Channel between user (user_cell, user) and base station bs on
  /// subcarrier sub.
  const Eigen::RowVectorXcd& h(int user_cell, int user, int bs, int sub) const {
    return rows_[index(user_cell, user, bs, sub)];
  }
  void set(int user_cell, int user, int bs, int sub, Eigen::RowVectorXcd v);

  /// Channel seen by the user of link j from base station bs.
  const Eigen::RowVectorXcd& link_channel(const LinkRef& l, int bs) const {
    return h(l.cell, l.user, bs, l.sub);
  }

  int n_cells() const { return n_cells_; }
  int n_users_per_cell() const { return n_users_per_cell_; }
  int n_sub() const { return n_sub_; }
  int n_tx() const { return n_tx_; }

  bool all_finite() const;
  /// True if every entry has zero imaginary part (tolerance `tol`).
  bool is_real(double tol = 0.0) const;

 private:
  std::size_t index(int user_cell, int user, int bs, int sub) const;

  int n_cells_, n_users_per_cell_, n_sub_, n_tx_;
  std::vector<Eigen::RowVectorXcd> rows_;
};

/// Beamforming vectors f_kmn (units sqrt(watt)), one per link of V.
class BeamformerSet {
 public:
  BeamformerSet(int n_links, int n_tx);
  explicit BeamformerSet(const Scenario& s)
      : BeamformerSet(s.n_links(), s.n_tx()) {}

  const Eigen::VectorXcd& f(int j) const { return beams_.at(j); }
  Eigen::VectorXcd& f(int j) { return beams_.at(j); }

  int n_links() const { return static_cast<int>(beams_.size()); }
  int n_tx() const { return n_tx_; }

  /// Sum of ||f_kmn||^2 over the links of one cell.
  double cell_power(const Scenario& s, int cell) const;
  Eigen::VectorXd per_cell_power(const Scenario& s) const;

  /// Checks the per-cell budget sum ||f||^2 <= p_max + tol for every cell.
  bool power_feasible(const Scenario& s, double tol = 1e-8) const;

 private:
  int n_tx_;
  std::vector<Eigen::VectorXcd> beams_;
};

/// Exact SINR, rate and power evaluation of a candidate beamformer set.
struct RateReport {
  Eigen::VectorXd sinr;            // per link of V
  Eigen::VectorXd rate_bits;       // log2(1 + sinr)
  double weighted_sum_rate = 0.0;  // sum of w_km * rate over V
  Eigen::VectorXd per_cell_power;  // watts
};

/// SINR of link j under Eq.-(2)-style evaluation with unit noise power:
/// |h_kmn f_kmn|^2 / (1 + sum over interfering cells of |h_km'n f_k'm'n|^2).
double compute_sinr(const Scenario& scenario, const ChannelSet& channels,
                    const BeamformerSet& beams, int j);

/// Full report over all links.  Throws ModelError naming the offending
/// index on dimension mismatch.
RateReport evaluate(const Scenario& scenario, const ChannelSet& channels,
                    const BeamformerSet& beams);

}  // namespace cobeam
