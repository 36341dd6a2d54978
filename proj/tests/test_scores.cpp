// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "stagger/errors.hpp"
#include "stagger/group_time.hpp"
#include "stagger/panel.hpp"
#include "stagger/rng.hpp"
#include "stagger/scores.hpp"

using namespace stagger;

namespace {

// Two-arm design (cohort g0 vs never) on T periods with one covariate that
// optionally shifts both adoption odds and the outcome trend.
Panel two_arm_panel(int n, int T, std::int64_t g0, double tau, double confound,
                    double noise, std::uint64_t seed) {
  Rng rng(seed);
  PanelInput in;
  in.x.resize(1);
  for (int i = 0; i < n; ++i) {
    const double xv = rng.normal();
    const double pg = 1.0 / (1.0 + std::exp(-(confound * xv)));
    const std::int64_t g = rng.uniform() < pg ? g0 : kNever;
    const double alpha = rng.normal();
    for (int t = 1; t <= T; ++t) {
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.cohort.push_back(g);
      in.x[0].push_back(xv);
      double y = alpha + 0.1 * t + confound * xv * t;
      if (g != kNever && t >= g) y += tau;
      if (noise > 0) y += noise * rng.normal();
      in.outcome.push_back(y);
    }
  }
  return build_panel(in);
}

}  // namespace

TEST_CASE("fold plans are deterministic, balanced, and seed-sensitive") {
  const FoldPlan a = make_folds(103, 5, 42);
  const FoldPlan b = make_folds(103, 5, 42);
  CHECK(a.fold == b.fold);
  REQUIRE(a.fold.size() == 103);
  std::vector<int> counts(5, 0);
  for (int f : a.fold) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++counts[f];
  }
  for (int c : counts) {
    CHECK(c >= 103 / 5);
    CHECK(c <= 103 / 5 + 1);
  }
  const FoldPlan c = make_folds(103, 5, 43);
  CHECK(a.fold != c.fold);
  CHECK_THROWS_AS(make_folds(10, 1, 0), Error);
  CHECK_THROWS_AS(make_folds(3, 5, 0), Error);
}

TEST_CASE("cross-fitting recovers noiseless effects") {
  // Confounded adoption but zero noise: the fold-out regression of control
  // long differences is exact, so the estimate hits the truth.
  const Panel p = two_arm_panel(400, 4, 3, 0.7, 0.8, 0.0, 11);
  const CrossfitResult r = crossfit_gatt(p, 3, 4, 5, 2024);
  CHECK(std::abs(r.theta - 0.7) < 1e-10);
  CHECK(r.folds == 5);
  CHECK(r.n_treated > 0);
  CHECK(r.n_comparison > r.n_treated);
  REQUIRE(r.influence.size() == p.n());
  // Influence reproduces the variance.
  const double var = r.influence.squaredNorm() /
                     (static_cast<double>(p.n()) * static_cast<double>(p.n()));
  CHECK(r.se == doctest::Approx(std::sqrt(var)).epsilon(1e-10));
}

TEST_CASE("cross-fitting corrects confounding that biases the raw contrast") {
  const double tau = 0.5;
  const Panel p = two_arm_panel(6000, 4, 3, tau, 1.2, 0.2, 707);
  const GattCell raw = gatt_cell(p, 3, 4, ControlKind::NeverTreated, false);
  const CrossfitResult dr = crossfit_gatt(p, 3, 4, 5, 99);
  CHECK(std::abs(raw.estimate - tau) > 0.25);  // confounded two-mean contrast
  CHECK(std::abs(dr.theta - tau) < 0.1);
}

TEST_CASE("cross-fitting is a pure function of the seed") {
  const Panel p = two_arm_panel(300, 4, 3, 0.4, 0.6, 0.5, 13);
  const CrossfitResult a = crossfit_gatt(p, 3, 4, 4, 555);
  const CrossfitResult b = crossfit_gatt(p, 3, 4, 4, 555);
  CHECK(a.theta == b.theta);
  CHECK(a.se == b.se);
  const CrossfitResult c = crossfit_gatt(p, 3, 4, 4, 556);
  CHECK(a.theta != c.theta);  // different folds move the estimate slightly
}

TEST_CASE("fold starvation is reported") {
  // 4 treated units cannot populate 5 folds: some fold has no cohort unit (or
  // one fold holds them all and its complement is starved). Either way the
  // library must raise FoldCohortStarvation instead of dividing by zero.
  Rng rng(77);
  PanelInput in;
  in.x.resize(1);
  for (int i = 0; i < 40; ++i) {
    const std::int64_t g = i < 4 ? 3 : kNever;
    for (int t = 1; t <= 4; ++t) {
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.cohort.push_back(g);
      in.x[0].push_back(rng.normal());
      in.outcome.push_back(rng.normal());
    }
  }
  const Panel p = build_panel(in);
  CHECK_THROWS_AS(crossfit_gatt(p, 3, 4, 5, 1), Error);
  try {
    crossfit_gatt(p, 3, 4, 5, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FoldCohortStarvation);
  }
}

TEST_CASE("riesz representer balances the constant function") {
  const Panel p = two_arm_panel(500, 4, 3, 0.3, 0.9, 0.3, 31);
  const RieszFit alpha = riesz_representer(p, 3, 4);
  // Sum of never-treated odds equals the cohort count after rescaling.
  double sum = 0;
  int n_g = 0;
  for (int i = 0; i < p.n(); ++i) {
    Eigen::VectorXd x(1);
    x[0] = p.xval(i, 2, 0);  // base period g-1 = 2
    if (p.cohort(i) == kNever) sum += alpha(x);
    if (p.cohort(i) == 3) ++n_g;
  }
  CHECK(sum == doctest::Approx(static_cast<double>(n_g)).epsilon(1e-9));
  CHECK(alpha.scale > 0.0);
}

TEST_CASE("score audit: zero mean when either nuisance is correct") {
  // Discrete covariate with known conditional adoption shares makes both true
  // nuisances available in closed form.
  Rng rng(401);
  const double tau = 0.6;
  const double px[2] = {0.3, 0.7};  // P(G = g | X = low/high)
  const double bx[2] = {-0.4, 0.9};   // control long-difference mean by X
  PanelInput in;
  in.x.resize(1);
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const int lev = rng.uniform() < 0.5 ? 0 : 1;
    const std::int64_t g = rng.uniform() < px[lev] ? 3 : kNever;
    for (int t = 1; t <= 3; ++t) {
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.cohort.push_back(g);
      in.x[0].push_back(static_cast<double>(lev));
      double y = 0.0;
      if (t == 3) y = bx[lev] + (g == 3 ? tau : 0.0) + 0.3 * rng.normal();
      in.outcome.push_back(y);
    }
  }
  const Panel p = build_panel(in);

  const auto m_true = [&](const Eigen::VectorXd& x) { return bx[x[0] > 0.5 ? 1 : 0]; };
  const auto m_wrong = [](const Eigen::VectorXd& x) { return 2.0 - 3.0 * x[0]; };
  const auto a_true = [&](const Eigen::VectorXd& x) {
    const double q = px[x[0] > 0.5 ? 1 : 0];
    return q / (1.0 - q);
  };
  const auto a_wrong = [](const Eigen::VectorXd& x) { return 0.2 + 1.7 * x[0]; };

  const ScoreAudit both = dr_score_audit(p, 3, 3, tau, m_true, a_true);
  const ScoreAudit m_only = dr_score_audit(p, 3, 3, tau, m_true, a_wrong);
  const ScoreAudit a_only = dr_score_audit(p, 3, 3, tau, m_wrong, a_true);
  const ScoreAudit neither = dr_score_audit(p, 3, 3, tau, m_wrong, a_wrong);
  CHECK(std::abs(both.mean) < 4 * both.se);
  CHECK(std::abs(m_only.mean) < 4 * m_only.se);
  CHECK(std::abs(a_only.mean) < 4 * a_only.se);
  CHECK(std::abs(neither.mean) > 5 * neither.se);  // both wrong: detectable drift
  CHECK(both.n > 0);
  CHECK_THROWS_AS(dr_score_audit(p, 3, 3, tau, nullptr, a_true), Error);
}

TEST_CASE("orthogonality: exact balance directions give a machine-zero slope") {
  // The representer rescale balances constants exactly, and the control
  // regression residuals are exactly orthogonal to the linear span, so a
  // constant m-direction plus a linear alpha-direction kill the first-order
  // term identically, not just asymptotically.
  const Panel p = two_arm_panel(800, 4, 3, 0.5, 0.8, 0.4, 3001);
  const auto h_m = [](const Eigen::VectorXd&) { return 0.7; };
  const auto h_a = [](const Eigen::VectorXd& x) { return 0.3 - 0.4 * x[0]; };
  const std::vector<double> grid = {-0.1, -0.05, -0.02, 0.0, 0.02, 0.05, 0.1};
  const OrthogonalityCheck chk = orthogonality_check(p, 3, 4, h_m, h_a, grid, true);
  CHECK(chk.slope_rel < 1e-10);
  REQUIRE(chk.eps.size() == grid.size());
  REQUIRE(chk.mean_score.size() == grid.size());
  // At eps = 0 the recentered mean score is numerically zero.
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] == 0.0) CHECK(std::abs(chk.mean_score[i]) < 1e-10);
}

TEST_CASE("orthogonality: small slope for the full score, large for the plug-in") {
  const Panel p = two_arm_panel(20000, 4, 3, 0.5, 0.8, 0.4, 3002);
  const auto h_m = [](const Eigen::VectorXd& x) { return 0.7 + 0.5 * x[0]; };
  const auto h_a = [](const Eigen::VectorXd& x) { return 0.3 - 0.4 * x[0]; };
  const std::vector<double> grid = {-0.1, -0.05, -0.02, 0.0, 0.02, 0.05, 0.1};
  const OrthogonalityCheck full = orthogonality_check(p, 3, 4, h_m, h_a, grid, true);
  const OrthogonalityCheck plug = orthogonality_check(p, 3, 4, h_m, h_a, grid, false);
  CHECK(full.slope_rel < 2e-2);
  CHECK(plug.slope_rel > 0.1);
  CHECK(plug.slope_rel > 10 * full.slope_rel);
}

TEST_CASE("comparison-sample errors carry specific codes") {
  const Panel p = two_arm_panel(200, 4, 3, 0.5, 0.0, 0.3, 51);
  // Base period t = g-1 is not a valid evaluation period.
  CHECK_THROWS_AS(crossfit_gatt(p, 3, 2, 4, 1), Error);
  // Unknown cohort.
  CHECK_THROWS_AS(crossfit_gatt(p, 9, 4, 4, 1), Error);
  // Out-of-range period.
  CHECK_THROWS_AS(crossfit_gatt(p, 3, 7, 4, 1), Error);
}

TEST_CASE("overlap failures are flagged rather than truncated") {
  // A covariate that perfectly separates cohorts drives fitted probabilities
  // to 1 and the odds to infinity; the library must refuse loudly.
  PanelInput in;
  in.x.resize(1);
  Rng rng(61);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t g = i < 100 ? 3 : kNever;
    const double xv = g == 3 ? 2.0 + rng.uniform() : -2.0 - rng.uniform();
    for (int t = 1; t <= 4; ++t) {
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.cohort.push_back(g);
      in.x[0].push_back(xv);
      in.outcome.push_back(rng.normal());
    }
  }
  const Panel p = build_panel(in);
  try {
    crossfit_gatt(p, 3, 4, 4, 7);
    // Either the logit diverges first (NoConvergence) or clipping trips the
    // overlap check; a silent finite answer would be wrong.
    FAIL("expected an overlap or convergence error");
  } catch (const Error& e) {
    const bool ok = e.code() == Errc::OverlapFailure || e.code() == Errc::NoConvergence ||
                    e.code() == Errc::SingleClass;
    CHECK(ok);
  }
}
