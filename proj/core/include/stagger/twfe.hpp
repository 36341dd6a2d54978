// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_TWFE_HPP
#define STAGGER_TWFE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "stagger/panel.hpp"

namespace stagger {

// Event-study window. Dummies are created for every event time k in
// [k_min, k_max] except the baseline k0; cells at horizons outside the window
// (and never-treated cells) carry no dummy and act as reference periods.
struct EventWindow {
  int k_min = 0;
  int k_max = 0;
  int k0 = -1;
};

// Window covering every event time occurring among observed treated cells.
EventWindow default_window(const Panel& p);

// Two-way fixed-effects event study, estimated by Frisch-Waugh: the dummies
// are demeaned within unit and period over observed cells, and the
// coefficients solved from the demeaned normal equations. Collinear dummy
// columns are dropped deterministically and flagged not retained.
struct TwfeFit {
  EventWindow window;
  std::vector<int> horizons;           // dummy horizons, ascending
  std::vector<std::uint8_t> retained;  // per horizon
  Eigen::VectorXd beta;                // per horizon; NaN where not retained
  Eigen::VectorXd se;                  // cluster-robust by unit; NaN where not retained
  Eigen::MatrixXd vcov;                // full coefficient covariance (NaN off retained)
  int demean_iterations = 0;

  int index_of(int k) const;           // -1 if k is not a dummy horizon
};
TwfeFit twfe_event_study(const Panel& p, const EventWindow& w);

// Implicit weights of the event-study coefficients on cohort-horizon effects.
// For a target horizon k, beta_k estimates sum_{g, k'>=0} w_{g,k'}(k) *
// tau_g(k') under the usual no-anticipation assumptions; the weights are the
// sums of the coefficient loadings over each cohort's post-adoption cells, so
// the companion identity is exact in sample: refitting on an outcome that is
// the indicator of cell (g, k') reproduces w_{g,k'}(k) as the coefficient.
struct CellWeight {
  std::int64_t g;
  int kprime;   // >= 0
  double w;
};
struct WeightDecomposition {
  int target_k = 0;
  bool retained = false;
  std::vector<CellWeight> weights;     // sorted by (g, kprime)
};
struct TwfeWeights {
  EventWindow window;
  std::vector<int> horizons;
  std::vector<std::uint8_t> retained;
  std::vector<WeightDecomposition> per_target;   // one per dummy horizon
};
TwfeWeights implicit_weights(const Panel& p, const EventWindow& w);

// Per-observation loadings pi of a retained target coefficient: beta_k =
// sum over observed cells of pi * y. Rows are observed cells ordered
// unit-major then time. Provided for verification; NotIdentified if the
// target column was dropped or absent.
Eigen::VectorXd coefficient_loadings(const Panel& p, const EventWindow& w, int target_k);

}  // namespace stagger

#endif  // STAGGER_TWFE_HPP
