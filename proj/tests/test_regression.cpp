// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "stagger/errors.hpp"
#include "stagger/regression.hpp"
#include "stagger/rng.hpp"

using namespace stagger;

TEST_CASE("least squares solves the normal equations on full-rank designs") {
  Rng rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 30, q = 4;
    Eigen::MatrixXd X(n, q);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < q; ++j) X(i, j) = rng.normal();
      y[i] = rng.normal();
    }
    const LeastSquares ls = least_squares(X, y);
    CHECK(ls.rank == q);
    CHECK(ls.dropped.empty());
    const Eigen::VectorXd direct =
        (X.transpose() * X).ldlt().solve(X.transpose() * y);
    CHECK((ls.beta - direct).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((ls.residuals - (y - X * ls.beta)).cwiseAbs().maxCoeff() < 1e-12);
    // Residual orthogonality.
    CHECK((X.transpose() * ls.residuals).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("least squares drops collinear columns and zeroes their slots") {
  Rng rng(103);
  const int n = 25;
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    X(i, 2) = 2.0 * X(i, 1);  // exact collinearity
    X(i, 3) = rng.normal();
    y[i] = 1.0 + 0.5 * X(i, 1) - X(i, 3) + 0.01 * rng.normal();
  }
  const LeastSquares ls = least_squares(X, y);
  CHECK(ls.rank == 3);
  REQUIRE(ls.dropped.size() == 1);
  CHECK(ls.beta[ls.dropped[0]] == 0.0);
  // Fitted values are still the projection onto the span.
  CHECK((X.transpose() * ls.residuals).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("alternating demeaning equals explicit two-way projection") {
  Rng rng(107);
  const int n = 8, T = 5;
  Eigen::MatrixXd V(n * T, 2);
  std::vector<int> gu(n * T), gt(n * T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) {
      const int r = i * T + t;
      gu[r] = i;
      gt[r] = t;
      V(r, 0) = rng.normal();
      V(r, 1) = rng.uniform();
    }
  const Eigen::MatrixXd W = alternating_demean(V, gu, gt, n, T);

  // Oracle: dense projection onto the orthocomplement of the dummy span,
  // parameterized full-rank (the dropped time-0 dummy lies in the span of
  // the unit dummies minus the remaining time dummies), so the pivoted QR
  // solve below is an exact least-squares projection.
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n * T, n + T - 1);
  for (int r = 0; r < n * T; ++r) {
    F(r, gu[r]) = 1.0;
    if (gt[r] > 0) F(r, n + gt[r] - 1) = 1.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd res = V.col(j) - F * qr.solve(V.col(j));
    CHECK((W.col(j) - res).cwiseAbs().maxCoeff() < 1e-9);
  }

  // Idempotence: demeaning a demeaned matrix is a no-op.
  const Eigen::MatrixXd W2 = alternating_demean(W, gu, gt, n, T);
  CHECK((W2 - W).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("balanced panels demean to machine precision quickly") {
  Rng rng(109);
  const int n = 6, T = 4;
  Eigen::MatrixXd values(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) values(i, t) = rng.normal();
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask(n, T);
  mask.setOnes();
  int iters = 0;
  const Eigen::MatrixXd W = twoway_demean(values, mask, 1e-12, 10000, &iters);
  CHECK(iters <= 3);  // balanced case: second sweep is already a fixed point
  for (int i = 0; i < n; ++i) CHECK(std::abs(W.row(i).sum()) < 1e-10);
  for (int t = 0; t < T; ++t) CHECK(std::abs(W.col(t).sum()) < 1e-10);
}

TEST_CASE("logit matches an independent Newton solver") {
  Rng rng(113);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 200;
    Eigen::MatrixXd X(n, 3);
    std::vector<std::uint8_t> y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = rng.normal();
      X(i, 2) = rng.uniform();
      const double z = -0.3 + 0.8 * X(i, 1) - 0.5 * X(i, 2);
      y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-z))) ? 1 : 0;
    }
    const LogitFit fit = fit_logit(X, y);
    const Eigen::VectorXd ref = oracle::logit_newton(X, y, nullptr, 1e-8);
    CHECK((fit.beta - ref).cwiseAbs().maxCoeff() < 1e-6);
    // Fitted probabilities agree through the link.
    Eigen::VectorXd x0(3);
    x0 << 1.0, 0.5, 0.5;
    const double pr = fit.prob(x0);
    CHECK(pr == doctest::Approx(1.0 / (1.0 + std::exp(-ref.dot(x0)))).epsilon(1e-5));
  }
}

TEST_CASE("weighted logit respects observation weights") {
  // Duplicating a row is the same as giving it weight 2.
  Eigen::MatrixXd X(4, 2), Xd(5, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3;
  Xd << 1, 0, 1, 1, 1, 2, 1, 3, 1, 3;
  std::vector<std::uint8_t> y = {0, 0, 1, 1}, yd = {0, 0, 1, 1, 1};
  Eigen::VectorXd w(4);
  w << 1, 1, 1, 2;
  const LogitFit a = fit_logit(X, y, &w);
  const LogitFit b = fit_logit(Xd, yd);
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("logit rejects single-class outcomes") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 1, 1;
  std::vector<std::uint8_t> y = {1, 1, 1};
  try {
    fit_logit(X, y);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SingleClass);
  }
}

TEST_CASE("multinomial one-vs-rest probabilities normalize") {
  Rng rng(127);
  const int n = 300;
  Eigen::MatrixXd X(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    y[i] = rng.categorical({1.0, std::exp(X(i, 1)), 1.5});
  }
  const MultinomialFit fit = fit_multinomial(X, y, 3);
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.3;
  const Eigen::VectorXd pr = fit.probs(x0);
  CHECK(pr.size() == 3);
  CHECK(pr.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pr.minCoeff() > 0.0);
}

// ---------------------------------------------------------------------------
// Linear programming
// ---------------------------------------------------------------------------

namespace {

LpProblem box_problem(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                      const Eigen::VectorXd& b, const std::vector<char>& rel,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  LpProblem p;
  p.c = c;
  p.A = A;
  p.b = b;
  p.rel = rel;
  p.lo = lo;
  p.hi = hi;
  return p;
}

}  // namespace

TEST_CASE("simplex agrees with vertex enumeration on random boxed programs") {
  Rng rng(131);
  int solved = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4 vars
    const int m = 1 + static_cast<int>(rng.uniform() * 3);  // 1..3 rows
    Eigen::VectorXd c(n), lo(n), hi(n), b(m);
    Eigen::MatrixXd A(m, n);
    std::vector<char> rel;
    for (int j = 0; j < n; ++j) {
      c[j] = rng.normal();
      lo[j] = -1.0 - rng.uniform();
      hi[j] = 1.0 + rng.uniform();
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
      b[i] = rng.normal();
      const double u = rng.uniform();
      rel.push_back(u < 0.4 ? '<' : (u < 0.8 ? '>' : '='));
    }
    const LpProblem p = box_problem(c, A, b, rel, lo, hi);
    const oracle::LpVertexResult ref = oracle::lp_enumerate(p);
    if (!ref.feasible) {
      CHECK_THROWS_AS(solve_lp(p), Error);
      continue;
    }
    const LpSolution sol = solve_lp(p);
    CHECK(sol.objective == doctest::Approx(ref.objective).epsilon(1e-7));
    ++solved;
  }
  CHECK(solved >= 20);  // the generator must produce plenty of feasible cases
}

TEST_CASE("simplex handles known corner cases") {
  // Unbounded: minimize -x with x >= 0 and no upper bound.
  LpProblem ub;
  ub.c = Eigen::VectorXd::Constant(1, -1.0);
  ub.A = Eigen::MatrixXd::Zero(0, 1);
  ub.b = Eigen::VectorXd::Zero(0);
  ub.lo = Eigen::VectorXd::Zero(1);
  ub.hi = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  try {
    solve_lp(ub);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unbounded);
  }

  // Infeasible: x <= -1 with x >= 0.
  LpProblem inf;
  inf.c = Eigen::VectorXd::Constant(1, 1.0);
  inf.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  inf.b = Eigen::VectorXd::Constant(1, -1.0);
  inf.rel = {'<'};
  inf.lo = Eigen::VectorXd::Zero(1);
  inf.hi = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  try {
    solve_lp(inf);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Infeasible);
  }

  // Degenerate equality pair still solves: x + y = 1, x - y = 0.
  LpProblem eq;
  eq.c = Eigen::VectorXd::Constant(2, 1.0);
  eq.A.resize(2, 2);
  eq.A << 1, 1, 1, -1;
  eq.b.resize(2);
  eq.b << 1, 0;
  eq.rel = {'=', '='};
  eq.lo = Eigen::VectorXd::Constant(2, -10.0);
  eq.hi = Eigen::VectorXd::Constant(2, 10.0);
  const LpSolution sol = solve_lp(eq);
  CHECK(sol.x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(0.5).epsilon(1e-9));

  // Free variables (no finite bounds).
  LpProblem fr;
  fr.c.resize(2);
  fr.c << 1.0, 2.0;
  fr.A.resize(2, 2);
  fr.A << 1, 0, 0, 1;
  fr.b.resize(2);
  fr.b << -3, -4;
  fr.rel = {'>', '>'};
  const double kInf = std::numeric_limits<double>::infinity();
  fr.lo = Eigen::VectorXd::Constant(2, -kInf);
  fr.hi = Eigen::VectorXd::Constant(2, kInf);
  const LpSolution s2 = solve_lp(fr);
  CHECK(s2.objective == doctest::Approx(-11.0).epsilon(1e-9));
}
