// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_SCORES_HPP
#define STAGGER_SCORES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "stagger/panel.hpp"

namespace stagger {

// Deterministic unit-level fold assignment: units are ordered by
// hash64(seed, i) (ties by i) and dealt round-robin, so folds are balanced
// and the plan is a pure function of (n, M, seed). All periods of a unit
// share its fold.
struct FoldPlan {
  int M = 0;
  std::vector<int> fold;  // per unit, 0..M-1
};
FoldPlan make_folds(int n, int M, std::uint64_t seed);

// Doubly robust group-time contrast via cross-fitted orthogonal scores on the
// comparison sample {G = g} u {never treated}, using the long difference
// Ytilde_i = Y_it - Y_{i,g-1} and covariates at the base period g-1.
//
//   psi_i = 1{G=g} (Ytilde - theta) - [1{G=g} - 1{G=inf} alpha(X)] m(X)
//           - 1{G=inf} alpha(X) (Ytilde - m(X))       (solved for theta)
//
// m is a fold-out linear regression of the never-treated long differences on
// (1, X); alpha is the fold-out logistic odds of cohort membership, rescaled
// within each fold so the held-out never-treated odds sum to the held-out
// cohort count (exact balance of the constant function).
struct CrossfitResult {
  double theta = 0, se = 0;
  int n_comparison = 0, n_treated = 0;
  int folds = 0;
  Eigen::VectorXd influence;  // full-panel indexing, mean 0 over the sample
};
CrossfitResult crossfit_gatt(const Panel& p, std::int64_t g, int t, int M,
                             std::uint64_t seed);

// Whole-sample representer: scaled odds alpha(x) from a logistic fit of
// cohort-g membership against the never-treated, rescaled once so the
// never-treated odds sum to the cohort count.
struct RieszFit {
  Eigen::VectorXd beta;  // logit coefficients on (1, x)
  double scale = 1.0;
  double operator()(const Eigen::VectorXd& x) const;
};
RieszFit riesz_representer(const Panel& p, std::int64_t g, int t);

// Mean of the orthogonal score over the (g, t) comparison sample at supplied
// theta and nuisance functions, with its Monte Carlo standard error; m and
// alpha receive the base-period covariate vector. This is the audit entry
// point for double robustness: the mean is within sampling error of zero at
// the true theta whenever either nuisance is correct.
struct ScoreAudit {
  double mean = 0, se = 0;
  int n = 0;
};
ScoreAudit dr_score_audit(const Panel& p, std::int64_t g, int t, double theta,
                          const std::function<double(const Eigen::VectorXd&)>& m,
                          const std::function<double(const Eigen::VectorXd&)>& alpha);

// Empirical Neyman-orthogonality probe: perturbs the fitted nuisances as
// m + eps*h_m and alpha + eps*h_alpha and fits a quadratic in eps to the mean
// score. slope_rel = |b1| / max(1, |b2|) should be tiny for the orthogonal
// score; include_dual = false drops the representer correction term (a
// deliberately non-orthogonal plug-in) for contrast.
struct OrthogonalityCheck {
  double b0 = 0, b1 = 0, b2 = 0;
  double slope_rel = 0;
  std::vector<double> eps, mean_score;
};
OrthogonalityCheck orthogonality_check(
    const Panel& p, std::int64_t g, int t,
    const std::function<double(const Eigen::VectorXd&)>& h_m,
    const std::function<double(const Eigen::VectorXd&)>& h_alpha,
    const std::vector<double>& eps_grid, bool include_dual = true);

}  // namespace stagger

#endif  // STAGGER_SCORES_HPP
