// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_REGRESSION_HPP
#define STAGGER_REGRESSION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace stagger {

// ---------------------------------------------------------------------------
// Least squares with deterministic rank handling.
// Column-pivoted Householder QR; collinear columns are dropped (smallest
// pivots first) and reported, with zero coefficients in the dropped slots.
// ---------------------------------------------------------------------------
struct LeastSquares {
  Eigen::VectorXd beta;        // p entries; 0 at dropped columns
  Eigen::VectorXd residuals;   // y - X beta
  std::vector<int> dropped;    // dropped column indices, ascending
  int rank = 0;
};
LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// ---------------------------------------------------------------------------
// Two-way (unit/time) demeaning by alternating projections.
// ---------------------------------------------------------------------------

// General form: V holds stacked observations (rows), g1/g2 give the two group
// ids per row (0-based, sizes n1/n2). Group means are subtracted alternately
// until the sup-norm change falls below tol; exceeding max_iter raises
// NoConvergence. On a balanced two-way layout a single sweep is exact.
Eigen::MatrixXd alternating_demean(Eigen::MatrixXd V, const std::vector<int>& g1,
                                   const std::vector<int>& g2, int n1, int n2,
                                   double tol = 1e-12, int max_iter = 10000,
                                   int* iterations = nullptr);

// Panel-shaped convenience: values is n x T, mask selects the cells that
// participate (unobserved cells are returned unchanged as 0).
Eigen::MatrixXd twoway_demean(
    const Eigen::MatrixXd& values,
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& mask,
    double tol = 1e-12, int max_iter = 10000, int* iterations = nullptr);

// ---------------------------------------------------------------------------
// Logistic regression by IRLS with a small ridge and a step-halving
// safeguard that keeps the penalized deviance monotone.
// ---------------------------------------------------------------------------
struct LogitFit {
  Eigen::VectorXd beta;
  int iterations = 0;
  double penalized_nll = 0.0;
  double prob(const Eigen::VectorXd& x) const;  // fitted P(y = 1 | x)
};
LogitFit fit_logit(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
                   const Eigen::VectorXd* weights = nullptr, double ridge = 1e-8,
                   double tol = 1e-8, int max_iter = 100);

// One-vs-rest multinomial built on fit_logit; class probabilities are the
// renormalized per-class logistic fits.
struct MultinomialFit {
  std::vector<Eigen::VectorXd> beta;  // one coefficient vector per class
  Eigen::VectorXd probs(const Eigen::VectorXd& x) const;
};
MultinomialFit fit_multinomial(const Eigen::MatrixXd& X, const std::vector<int>& y,
                               int n_classes, double ridge = 1e-8, double tol = 1e-8,
                               int max_iter = 100);

// ---------------------------------------------------------------------------
// Dense linear programming: two-phase primal simplex with Bland's rule.
// minimize c'x  s.t.  A x (<=,>=,=) b,  lo <= x <= hi
// Bounds may be +-infinity. Ties are broken by lowest index, so solutions are
// deterministic. Throws Infeasible / Unbounded.
// ---------------------------------------------------------------------------
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<char> rel;  // per row: '<' (<=), '>' (>=), '='
  Eigen::VectorXd lo, hi;
};
struct LpSolution {
  double objective = 0.0;
  Eigen::VectorXd x;
};
LpSolution solve_lp(const LpProblem& p);

}  // namespace stagger

#endif  // STAGGER_REGRESSION_HPP
