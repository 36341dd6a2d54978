// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_TESTS_ORACLES_HPP
#define STAGGER_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stagger/panel.hpp"
#include "stagger/regression.hpp"
#include "stagger/sensitivity.hpp"
#include "stagger/twfe.hpp"

// Independent re-derivations used as cross-checks. Each oracle takes a
// different computational route from the library code it validates, so an
// agreement is evidence, not circularity.
namespace oracle {

// Event-study slopes by one explicit least squares on
// [event dummies, unit dummies, time dummies] (no demeaning). Returns the
// slope per horizon in `horizons` order, NaN where the column was dropped.
Eigen::VectorXd twfe_by_dummies(const stagger::Panel& p, const stagger::EventWindow& w,
                                const std::vector<int>& horizons);

// Observation loadings pi(k) by explicit projection: residualize the event
// dummies on the fixed-effect dummy block with a dense QR, then
// pi = Z (Z'Z)^{-1} e_k. Row order matches the library's collect order
// (unit-major, observed cells only).
Eigen::VectorXd loadings_by_projection(const stagger::Panel& p,
                                       const stagger::EventWindow& w, int target_k);

// Minimum of c'x by brute-force vertex enumeration. Only valid for problems
// whose variables all have finite bounds (the feasible set is a polytope);
// n must be small. feasible=false when no vertex satisfies all constraints.
struct LpVertexResult {
  bool feasible = false;
  double objective = 0;
  Eigen::VectorXd x;
};
LpVertexResult lp_enumerate(const stagger::LpProblem& p);

// Endpoints of the curvature-class identified set by enumerating the vertices
// of the generalized-coordinate box (pre-period levels and post-period second
// differences are free coordinates with independent bounds).
stagger::Interval identified_set_vertex(const stagger::DeviationMap& map,
                                        const stagger::RestrictionClass& rc);

// Ridge-penalized logistic regression by full Newton steps with an explicit
// Hessian solve (no step halving), tolerance 1e-12.
Eigen::VectorXd logit_newton(const Eigen::MatrixXd& X,
                             const std::vector<std::uint8_t>& y,
                             const Eigen::VectorXd* weights, double ridge);

}  // namespace oracle

#endif  // STAGGER_TESTS_ORACLES_HPP
