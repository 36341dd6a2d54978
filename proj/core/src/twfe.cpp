// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/twfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "stagger/errors.hpp"
#include "stagger/regression.hpp"

namespace stagger {

namespace {

struct DesignRows {
  std::vector<int> unit, time;          // per observed cell
  std::vector<std::int64_t> cohort;     // kNever for never-treated
  std::vector<int> event;               // t - g; meaningless for never rows
  std::vector<double> y;
};

DesignRows collect_rows(const Panel& p) {
  DesignRows r;
  const std::size_t guess = static_cast<std::size_t>(p.n()) * p.T();
  r.unit.reserve(guess);
  r.time.reserve(guess);
  r.cohort.reserve(guess);
  r.event.reserve(guess);
  r.y.reserve(guess);
  for (int i = 0; i < p.n(); ++i) {
    for (int t = 1; t <= p.T(); ++t) {
      if (!p.observed(i, t)) continue;
      r.unit.push_back(i);
      r.time.push_back(t - 1);
      r.cohort.push_back(p.cohort(i));
      r.event.push_back(p.never_treated(i)
                            ? std::numeric_limits<int>::min()
                            : static_cast<int>(t - p.cohort(i)));
      r.y.push_back(p.y(i, t));
    }
  }
  return r;
}

struct BuiltDesign {
  DesignRows rows;
  std::vector<int> horizons;           // dummy horizons, ascending
  std::vector<std::uint8_t> retained;  // per horizon
  std::vector<int> col_of;             // horizon index -> retained column position (-1)
  Eigen::MatrixXd Z;                   // demeaned dummies, retained columns only
  Eigen::MatrixXd Ginv;                // (Z'Z)^-1 on retained columns
  int demean_iterations = 0;
};

BuiltDesign build_design(const Panel& p, const EventWindow& w) {
  if (w.k_min > w.k_max) fail(Errc::EmptyWindow, "window has k_min > k_max");
  BuiltDesign d;
  d.rows = collect_rows(p);

  // Candidate horizons: event times inside the window, except the baseline,
  // that occur among observed treated cells.
  std::set<int> occur;
  for (std::size_t r = 0; r < d.rows.event.size(); ++r) {
    if (d.rows.cohort[r] == kNever) continue;
    const int k = d.rows.event[r];
    if (k >= w.k_min && k <= w.k_max && k != w.k0) occur.insert(k);
  }
  if (occur.empty())
    fail(Errc::EmptyWindow, "no event-time dummies occur inside the window");
  d.horizons.assign(occur.begin(), occur.end());
  const int K = static_cast<int>(d.horizons.size());
  std::map<int, int> pos;
  for (int j = 0; j < K; ++j) pos[d.horizons[j]] = j;

  const Eigen::Index R = static_cast<Eigen::Index>(d.rows.unit.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(R, K);
  for (Eigen::Index r = 0; r < R; ++r) {
    if (d.rows.cohort[r] == kNever) continue;
    const auto it = pos.find(d.rows.event[r]);
    if (it != pos.end()) D(r, it->second) = 1.0;
  }

  Eigen::MatrixXd Z = alternating_demean(std::move(D), d.rows.unit, d.rows.time,
                                         p.n(), p.T(), 1e-12, 10000,
                                         &d.demean_iterations);

  // Deterministic rank handling on the demeaned dummies.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  d.retained.assign(K, 0);
  const auto perm = qr.colsPermutation().indices();
  for (int j = 0; j < rank; ++j) d.retained[perm[j]] = 1;
  d.col_of.assign(K, -1);
  int c = 0;
  for (int j = 0; j < K; ++j)
    if (d.retained[j]) d.col_of[j] = c++;

  d.Z.resize(R, rank);
  for (int j = 0; j < K; ++j)
    if (d.retained[j]) d.Z.col(d.col_of[j]) = Z.col(j);
  const Eigen::MatrixXd G = d.Z.transpose() * d.Z;
  d.Ginv = G.ldlt().solve(Eigen::MatrixXd::Identity(rank, rank));
  return d;
}

}  // namespace

EventWindow default_window(const Panel& p) {
  int k_min = std::numeric_limits<int>::max();
  int k_max = std::numeric_limits<int>::min();
  for (int i = 0; i < p.n(); ++i) {
    if (p.never_treated(i)) continue;
    for (int t = 1; t <= p.T(); ++t) {
      if (!p.observed(i, t)) continue;
      const int k = static_cast<int>(t - p.cohort(i));
      k_min = std::min(k_min, k);
      k_max = std::max(k_max, k);
    }
  }
  if (k_min > k_max)
    fail(Errc::EmptyWindow, "panel has no observed treated-unit cells");
  return {k_min, k_max, -1};
}

int TwfeFit::index_of(int k) const {
  const auto it = std::lower_bound(horizons.begin(), horizons.end(), k);
  if (it == horizons.end() || *it != k) return -1;
  return static_cast<int>(it - horizons.begin());
}

TwfeFit twfe_event_study(const Panel& p, const EventWindow& w) {
  BuiltDesign d = build_design(p, w);
  const int K = static_cast<int>(d.horizons.size());
  const Eigen::Index R = d.Z.rows();
  const int rank = static_cast<int>(d.Z.cols());

  // Demean the outcome over the same cells, then solve the FWL system.
  Eigen::MatrixXd ymat =
      Eigen::Map<Eigen::MatrixXd>(d.rows.y.data(), R, 1);
  ymat = alternating_demean(std::move(ymat), d.rows.unit, d.rows.time, p.n(), p.T());
  const Eigen::VectorXd ztilde_y = d.Z.transpose() * ymat.col(0);
  const Eigen::VectorXd br = d.Ginv * ztilde_y;

  // Cluster-robust (by unit) sandwich on the retained block.
  const Eigen::VectorXd resid = ymat.col(0) - d.Z * br;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(rank, rank);
  {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(p.n(), rank);
    for (Eigen::Index r = 0; r < R; ++r)
      scores.row(d.rows.unit[r]) += resid[r] * d.Z.row(r);
    meat = scores.transpose() * scores;
  }
  const Eigen::MatrixXd Vr = d.Ginv * meat * d.Ginv;

  TwfeFit fit;
  fit.window = w;
  fit.horizons = d.horizons;
  fit.retained = d.retained;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  fit.beta = Eigen::VectorXd::Constant(K, nan);
  fit.se = Eigen::VectorXd::Constant(K, nan);
  fit.vcov = Eigen::MatrixXd::Constant(K, K, nan);
  for (int j = 0; j < K; ++j) {
    if (!d.retained[j]) continue;
    const int cj = d.col_of[j];
    fit.beta[j] = br[cj];
    fit.se[j] = std::sqrt(std::max(0.0, Vr(cj, cj)));
    for (int l = 0; l < K; ++l)
      if (d.retained[l]) fit.vcov(j, l) = Vr(cj, d.col_of[l]);
  }
  fit.demean_iterations = d.demean_iterations;
  return fit;
}

TwfeWeights implicit_weights(const Panel& p, const EventWindow& w) {
  BuiltDesign d = build_design(p, w);
  const int K = static_cast<int>(d.horizons.size());
  const Eigen::Index R = d.Z.rows();

  // Post-adoption cells present among observed rows, as (cohort, k') pairs.
  std::set<std::pair<std::int64_t, int>> post_cells;
  for (Eigen::Index r = 0; r < R; ++r)
    if (d.rows.cohort[r] != kNever && d.rows.event[r] >= 0)
      post_cells.insert({d.rows.cohort[r], d.rows.event[r]});

  TwfeWeights out;
  out.window = w;
  out.horizons = d.horizons;
  out.retained = d.retained;
  out.per_target.resize(K);

  for (int j = 0; j < K; ++j) {
    WeightDecomposition& wd = out.per_target[j];
    wd.target_k = d.horizons[j];
    wd.retained = d.retained[j] != 0;
    if (!wd.retained) continue;
    // pi = Z (Z'Z)^-1 e_j over observed cells; weights are its sums over the
    // post-adoption cells of each cohort.
    const Eigen::VectorXd pi = d.Z * d.Ginv.col(d.col_of[j]);
    std::map<std::pair<std::int64_t, int>, double> acc;
    for (const auto& cell : post_cells) acc[cell] = 0.0;
    for (Eigen::Index r = 0; r < R; ++r) {
      if (d.rows.cohort[r] == kNever || d.rows.event[r] < 0) continue;
      acc[{d.rows.cohort[r], d.rows.event[r]}] += pi[r];
    }
    wd.weights.reserve(acc.size());
    for (const auto& [cell, wsum] : acc)
      wd.weights.push_back({cell.first, cell.second, wsum});
  }
  return out;
}

Eigen::VectorXd coefficient_loadings(const Panel& p, const EventWindow& w, int target_k) {
  BuiltDesign d = build_design(p, w);
  const auto it = std::lower_bound(d.horizons.begin(), d.horizons.end(), target_k);
  if (it == d.horizons.end() || *it != target_k)
    fail(Errc::NotIdentified,
         "horizon " + std::to_string(target_k) + " has no dummy in this window");
  const int j = static_cast<int>(it - d.horizons.begin());
  if (!d.retained[j])
    fail(Errc::NotIdentified,
         "horizon " + std::to_string(target_k) + " was dropped as collinear");
  return d.Z * d.Ginv.col(d.col_of[j]);
}

}  // namespace stagger
