// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "stagger/errors.hpp"
#include "stagger/group_time.hpp"
#include "stagger/panel.hpp"
#include "stagger/rng.hpp"

using namespace stagger;

namespace {

struct Gen {
  PanelInput in;
  void add(std::int64_t unit, int T, std::int64_t cohort,
           const std::vector<double>& y,
           const std::vector<double>* x = nullptr,
           const std::vector<std::uint8_t>* obs = nullptr) {
    for (int t = 1; t <= T; ++t) {
      in.unit.push_back(unit);
      in.time.push_back(t);
      in.outcome.push_back(y[static_cast<std::size_t>(t - 1)]);
      in.cohort.push_back(cohort);
      if (x) {
        if (in.x.empty()) in.x.resize(1);
        in.x[0].push_back((*x)[static_cast<std::size_t>(t - 1)]);
      }
      if (obs) in.observed.push_back((*obs)[static_cast<std::size_t>(t - 1)]);
    }
  }
};

// n units per arm, additive unit/time effects plus cohort-horizon effects.
Panel additive_panel(int n_per_arm, int T, const std::vector<std::int64_t>& gs,
                     double (*tau)(std::int64_t, int), std::uint64_t seed,
                     double noise_sd = 0.0) {
  Rng rng(seed);
  Gen gen;
  std::int64_t unit = 1;
  std::vector<std::int64_t> arms = gs;
  arms.push_back(kNever);
  std::vector<double> lambda(static_cast<std::size_t>(T));
  for (double& l : lambda) l = rng.normal() * 0.5;
  for (std::int64_t g : arms)
    for (int i = 0; i < n_per_arm; ++i, ++unit) {
      const double alpha = rng.normal();
      std::vector<double> y(static_cast<std::size_t>(T));
      for (int t = 1; t <= T; ++t) {
        double v = alpha + lambda[static_cast<std::size_t>(t - 1)];
        if (g != kNever && t >= g) v += tau(g, t - static_cast<int>(g));
        if (noise_sd > 0) v += noise_sd * rng.normal();
        y[static_cast<std::size_t>(t - 1)] = v;
      }
      gen.add(unit, T, g, y);
    }
  return build_panel(gen.in);
}

double tau_step(std::int64_t g, int k) {
  return 0.3 * static_cast<double>(g) + 0.1 * k;
}

// Direct four-mean difference-in-differences for a cell, as a cross-check.
double four_mean_did(const Panel& p, std::int64_t g, int t, bool never_only) {
  const int base = static_cast<int>(g) - 1;
  double tg_t = 0, tg_b = 0, c_t = 0, c_b = 0;
  int ng = 0, nc = 0;
  for (int i = 0; i < p.n(); ++i) {
    const std::int64_t G = p.cohort(i);
    const bool is_g = G == g;
    const bool is_c = never_only
                          ? G == kNever
                          : (G == kNever || G > std::max<std::int64_t>(t, g - 1));
    if (!is_g && !is_c) continue;
    if (!p.observed(i, t) || !p.observed(i, base)) continue;
    if (is_g) {
      tg_t += p.y(i, t);
      tg_b += p.y(i, base);
      ++ng;
    } else {
      c_t += p.y(i, t);
      c_b += p.y(i, base);
      ++nc;
    }
  }
  REQUIRE(ng > 0);
  REQUIRE(nc > 0);
  return (tg_t - tg_b) / ng - (c_t - c_b) / nc;
}

}  // namespace

TEST_CASE("gatt_cell equals the four-mean contrast with noise") {
  const Panel p = additive_panel(7, 6, {3, 5}, tau_step, 91, 0.7);
  for (std::int64_t g : {std::int64_t{3}, std::int64_t{5}})
    for (int t = 1; t <= 6; ++t) {
      if (t == g - 1) continue;
      const GattCell never = gatt_cell(p, g, t, ControlKind::NeverTreated);
      CHECK(never.estimate ==
            doctest::Approx(four_mean_did(p, g, t, true)).epsilon(1e-12));
      CHECK(never.k == t - static_cast<int>(g));
      const GattCell nyt = gatt_cell(p, g, t, ControlKind::NotYetTreated);
      CHECK(nyt.estimate ==
            doctest::Approx(four_mean_did(p, g, t, false)).epsilon(1e-12));
      if (g == 3 && t <= 3) CHECK(nyt.n_control > never.n_control);
    }
}

TEST_CASE("noiseless recovery of cohort-horizon effects") {
  const Panel p = additive_panel(4, 6, {3, 5}, tau_step, 17, 0.0);
  const GattTable tab = gatt_table(p, ControlKind::NeverTreated);
  CHECK(tab.warnings.empty());
  for (const GattCell& c : tab.cells) {
    CHECK(std::abs(c.estimate - tau_step(c.g, c.k)) < 1e-10);
    CHECK(c.se >= 0.0);
  }
  // Not-yet-treated controls recover the same truths under parallel trends.
  const GattTable tab2 = gatt_table(p, ControlKind::NotYetTreated);
  for (const GattCell& c : tab2.cells)
    CHECK(std::abs(c.estimate - tau_step(c.g, c.k)) < 1e-10);
}

TEST_CASE("influence vectors reproduce the estimate and variance") {
  const Panel p = additive_panel(9, 5, {3}, tau_step, 57, 1.1);
  const GattCell c = gatt_cell(p, 3, 4, ControlKind::NeverTreated);
  REQUIRE(c.influence.size() == p.n());
  // Mean-zero influence, variance identity Var = (1/n^2) sum phi^2.
  CHECK(std::abs(c.influence.sum()) < 1e-9);
  const double var = c.influence.squaredNorm() /
                     (static_cast<double>(p.n()) * static_cast<double>(p.n()));
  CHECK(c.se == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  // The standard error shrinks roughly like 1/sqrt(n): quadruple the sample.
  const Panel p4 = additive_panel(36, 5, {3}, tau_step, 57, 1.1);
  const GattCell c4 = gatt_cell(p4, 3, 4, ControlKind::NeverTreated);
  CHECK(c4.se < c.se);
}

TEST_CASE("gatt_cell input validation") {
  const Panel p = additive_panel(3, 5, {3}, tau_step, 5, 0.0);
  // t == g-1 is the base period: not a valid evaluation period.
  CHECK_THROWS_AS(gatt_cell(p, 3, 2, ControlKind::NeverTreated), Error);
  // Unknown cohort.
  CHECK_THROWS_AS(gatt_cell(p, 4, 5, ControlKind::NeverTreated), Error);
  // Period outside the panel.
  CHECK_THROWS_AS(gatt_cell(p, 3, 9, ControlKind::NeverTreated), Error);
}

TEST_CASE("not-yet-treated control set honors G > max(t, g-1)") {
  // Two cohorts, no never-treated units: cohort 5 serves as control for
  // cohort 3 only while still untreated (t <= 4).
  Gen gen;
  std::int64_t unit = 1;
  for (int i = 0; i < 4; ++i, ++unit)
    gen.add(unit, 6, 3, {0, 0, 1, 1, 1, 1});
  for (int i = 0; i < 4; ++i, ++unit)
    gen.add(unit, 6, 5, {0, 0, 0, 0, 2, 2});
  const Panel p = build_panel(gen.in);
  const GattCell c = gatt_cell(p, 3, 3, ControlKind::NotYetTreated);
  CHECK(c.n_control == 4);
  CHECK(c.estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(gatt_cell(p, 3, 4, ControlKind::NotYetTreated).estimate - 1.0) < 1e-12);
  // At t = 5 cohort 5 is treated: control set becomes empty.
  CHECK_THROWS_AS(gatt_cell(p, 3, 5, ControlKind::NotYetTreated), Error);
  // Never-treated controls never exist in this design.
  CHECK_THROWS_AS(gatt_cell(p, 3, 3, ControlKind::NeverTreated), Error);
}

TEST_CASE("propensity reweighting matches unweighted on an unconfounded design") {
  // Covariate independent of cohort: the Hajek weights converge to constants,
  // so the reweighted estimate stays close to the unweighted one.
  Rng rng(301);
  Gen gen;
  std::int64_t unit = 1;
  const int T = 5;
  for (int arm = 0; arm < 2; ++arm) {
    const std::int64_t g = arm == 0 ? 3 : kNever;
    for (int i = 0; i < 150; ++i, ++unit) {
      const double xv = rng.normal();
      std::vector<double> y(T), x(T, xv);
      const double alpha = rng.normal();
      for (int t = 1; t <= T; ++t) {
        y[static_cast<std::size_t>(t - 1)] = alpha + 0.2 * t + 0.5 * xv +
                                             (g == 3 && t >= 3 ? 1.0 : 0.0) +
                                             0.3 * rng.normal();
      }
      gen.add(unit, T, g, y, &x);
    }
  }
  const Panel p = build_panel(gen.in);
  const GattCell plain = gatt_cell(p, 3, 4, ControlKind::NeverTreated, false);
  const GattCell rw = gatt_cell(p, 3, 4, ControlKind::NeverTreated, true);
  CHECK(rw.propensity);
  CHECK(std::abs(rw.estimate - plain.estimate) < 0.05);
  CHECK(std::abs(rw.estimate - 1.0) < 0.15);
}

TEST_CASE("propensity reweighting corrects covariate-driven trends") {
  // Covariate shifts both cohort membership and the outcome trend; the
  // unweighted contrast is biased, the reweighted one is not.
  Rng rng(302);
  Gen gen;
  std::int64_t unit = 1;
  const int T = 4;
  const double tau = 0.8;
  for (int i = 0; i < 4000; ++i, ++unit) {
    const double xv = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double pg = xv > 0 ? 0.75 : 0.25;
    const std::int64_t g = rng.uniform() < pg ? 3 : kNever;
    std::vector<double> y(T), x(T, xv);
    const double alpha = rng.normal();
    for (int t = 1; t <= T; ++t)
      y[static_cast<std::size_t>(t - 1)] = alpha + 0.9 * xv * t +
                                           (g == 3 && t >= 3 ? tau : 0.0) +
                                           0.1 * rng.normal();
    gen.add(unit, T, g, y, &x);
  }
  const Panel p = build_panel(gen.in);
  const GattCell plain = gatt_cell(p, 3, 3, ControlKind::NeverTreated, false);
  const GattCell rw = gatt_cell(p, 3, 3, ControlKind::NeverTreated, true);
  CHECK(std::abs(plain.estimate - tau) > 0.2);   // confounded
  CHECK(std::abs(rw.estimate - tau) < 0.08);     // corrected
}

TEST_CASE("sample-share aggregation uses cohort sizes") {
  // Two cohorts sized 100 and 300 share event time 0: omegas (0.25, 0.75).
  Rng rng(77);
  Gen gen;
  std::int64_t unit = 1;
  auto add_arm = [&](std::int64_t g, int count) {
    for (int i = 0; i < count; ++i, ++unit) {
      std::vector<double> y(5);
      for (int t = 1; t <= 5; ++t)
        y[static_cast<std::size_t>(t - 1)] =
            (g != kNever && t >= g ? 1.0 + 0.5 * static_cast<double>(g == 4) : 0.0) +
            0.01 * rng.normal();
      gen.add(unit, 5, g, y);
    }
  };
  add_arm(3, 100);
  add_arm(4, 300);
  add_arm(kNever, 100);
  const Panel p = build_panel(gen.in);
  const GattTable tab = gatt_table(p, ControlKind::NeverTreated);
  Scheme s;
  s.kind = Scheme::SampleShare;
  const AggregateResult agg = aggregate_event(tab.cells, p, s);
  const AggregateRow* k0 = nullptr;
  for (const AggregateRow& r : agg.rows)
    if (r.k == 0) k0 = &r;
  REQUIRE(k0 != nullptr);
  REQUIRE(k0->omegas.size() == 2);
  double w3 = 0, w4 = 0;
  for (const auto& [g, w] : k0->omegas) (g == 3 ? w3 : w4) = w;
  CHECK(w3 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w4 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(k0->estimate == doctest::Approx(0.25 * 1.0 + 0.75 * 1.5).epsilon(0.01));

  // Population shares override the sample sizes.
  Scheme pop;
  pop.kind = Scheme::PopulationShare;
  pop.population_shares = {{3, 0.5}, {4, 0.5}};
  const AggregateResult agg2 = aggregate_event(tab.cells, p, pop);
  for (const AggregateRow& r : agg2.rows)
    if (r.k == 0)
      CHECK(r.estimate == doctest::Approx(0.5 * 1.0 + 0.5 * 1.5).epsilon(0.01));
  // Missing share entry is an error.
  Scheme bad;
  bad.kind = Scheme::PopulationShare;
  bad.population_shares = {{3, 1.0}};
  CHECK_THROWS_AS(aggregate_event(tab.cells, p, bad), Error);

  // No cross-horizon loading: perturbing a k = 1 cell leaves k = 0 bit-identical.
  std::vector<GattCell> perturbed = tab.cells;
  for (GattCell& c : perturbed)
    if (c.k == 1) c.estimate += 100.0;
  const AggregateResult aggp = aggregate_event(perturbed, p, s);
  for (std::size_t i = 0; i < agg.rows.size(); ++i)
    if (agg.rows[i].k == 0) CHECK(agg.rows[i].estimate == aggp.rows[i].estimate);
}

TEST_CASE("aggregation weights are convex and renormalization is flagged") {
  // Cohort 4 reaches k = 1 only through t = 5; cohort 3 reaches k = 2. A
  // horizon that simply extends past a cohort's window is NOT a missing cell.
  const Panel p = additive_panel(5, 5, {3, 4}, tau_step, 19, 0.0);
  const GattTable tab = gatt_table(p, ControlKind::NeverTreated);
  Scheme s;
  const AggregateResult agg = aggregate_event(tab.cells, p, s);
  for (const AggregateRow& r : agg.rows) {
    double total = 0;
    for (const auto& [g, w] : r.omegas) {
      total += w;
      CHECK(w >= 0.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));  // convexity
    CHECK_FALSE(r.renormalized);
    if (r.k == 2)  // only cohort 3 exists at k = 2, and that is by design
      CHECK(r.estimate == doctest::Approx(tau_step(3, 2)).epsilon(1e-10));
  }
  CHECK(agg.warnings.empty());

  // Dropping an estimable cell (as gatt_table does when a control set fails)
  // triggers renormalization over the survivors, with a warning.
  std::vector<GattCell> pruned;
  for (const GattCell& c : tab.cells)
    if (!(c.g == 4 && c.k == 0)) pruned.push_back(c);
  const AggregateResult agg2 = aggregate_event(pruned, p, s);
  bool saw = false;
  for (const AggregateRow& r : agg2.rows)
    if (r.k == 0) {
      saw = true;
      CHECK(r.renormalized);
      REQUIRE(r.omegas.size() == 1);
      CHECK(r.omegas[0].first == 3);
      CHECK(r.omegas[0].second == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.estimate == doctest::Approx(tau_step(3, 0)).epsilon(1e-10));
    }
  CHECK(saw);
  CHECK_FALSE(agg2.warnings.empty());
}

TEST_CASE("exposure scheme weights by within-panel exposure") {
  Gen gen;
  std::int64_t unit = 1;
  // Exposure column present: cohort 3 units carry exposure 2, cohort 4 carry 1.
  auto add_arm = [&](std::int64_t g, double expo, int count, double effect) {
    for (int i = 0; i < count; ++i, ++unit)
      for (int t = 1; t <= 5; ++t) {
        gen.in.unit.push_back(unit);
        gen.in.time.push_back(t);
        gen.in.outcome.push_back(g != kNever && t >= g ? effect : 0.0);
        gen.in.cohort.push_back(g);
        gen.in.exposure.push_back(g == kNever ? 0.0 : expo);
      }
  };
  add_arm(3, 2.0, 10, 1.0);
  add_arm(4, 1.0, 10, 2.0);
  add_arm(kNever, 0.0, 10, 0.0);
  const Panel p = build_panel(gen.in);
  const GattTable tab = gatt_table(p, ControlKind::NeverTreated);
  Scheme s;
  s.kind = Scheme::Exposure;
  const AggregateResult agg = aggregate_event(tab.cells, p, s);
  for (const AggregateRow& r : agg.rows)
    if (r.k == 0) {
      // Exposure-weighted: (20*1 + 10*2) / 30 = 4/3.
      CHECK(r.estimate == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    }
  // Without an exposure column every unit carries weight 1, so the scheme
  // coincides with sample-share exactly.
  const Panel p2 = additive_panel(3, 5, {3, 4}, tau_step, 3, 0.0);
  const GattTable tab2 = gatt_table(p2, ControlKind::NeverTreated);
  const AggregateResult ae = aggregate_event(tab2.cells, p2, s);
  Scheme ss;
  const AggregateResult as = aggregate_event(tab2.cells, p2, ss);
  REQUIRE(ae.rows.size() == as.rows.size());
  for (std::size_t i = 0; i < ae.rows.size(); ++i)
    CHECK(ae.rows[i].estimate == as.rows[i].estimate);
}

TEST_CASE("cumulative effects are prefix sums with pooled influence") {
  const Panel p = additive_panel(6, 6, {3}, tau_step, 23, 0.4);
  const GattTable tab = gatt_table(p, ControlKind::NeverTreated);
  Scheme s;
  const AggregateResult agg = aggregate_event(tab.cells, p, s);
  const std::vector<CumulativeRow> cum = cumulative_effects(agg, p.n());
  REQUIRE(cum.size() == agg.rows.size());
  double run = 0;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    run += agg.rows[i].estimate;
    CHECK(cum[i].k == agg.rows[i].k);
    CHECK(cum[i].estimate == doctest::Approx(run).epsilon(1e-12));
    CHECK(cum[i].se >= 0.0);
  }
  // With a single cohort the pooled-influence variance at k = 0 matches the
  // cell variance exactly.
  CHECK(cum[0].se == doctest::Approx(agg.rows[0].se).epsilon(1e-12));
}

TEST_CASE("cumulative effects require a contiguous horizon path") {
  AggregateResult agg;
  AggregateRow r0, r2;
  r0.k = 0;
  r0.estimate = 1.0;
  r0.influence = Eigen::VectorXd::Zero(4);
  r2.k = 2;
  r2.estimate = 1.0;
  r2.influence = Eigen::VectorXd::Zero(4);
  agg.rows = {r0, r2};
  CHECK_THROWS_AS(cumulative_effects(agg, 4), Error);
}

TEST_CASE("imputation recovers effects on additive noiseless panels") {
  const Panel p = additive_panel(5, 6, {3, 5}, tau_step, 41, 0.0);
  const ImputationResult imp = imputation_event_study(p);
  REQUIRE(!imp.rows.empty());
  for (const ImputationRow& r : imp.rows) {
    // Event-time average over cohorts present at horizon k (sample shares).
    double num = 0;
    int den = 0;
    for (std::int64_t g : {std::int64_t{3}, std::int64_t{5}})
      if (g + r.k <= 6) {
        num += 5 * tau_step(g, r.k);
        den += 5;
      }
    CHECK(r.estimate == doctest::Approx(num / den).epsilon(1e-9));
    CHECK(r.n_cells == den);
  }
}

TEST_CASE("imputation requires an untreated backbone") {
  // All units adopt at t = 2 with no pre-period beyond t = 1: unit and time
  // effects are not separable from the treatment path.
  Gen gen;
  for (std::int64_t u = 1; u <= 4; ++u) gen.add(u, 4, 2, {0, 1, 1, 1});
  const Panel p = build_panel(gen.in);
  CHECK_THROWS_AS(imputation_event_study(p), Error);
}

TEST_CASE("placebo cells cover requested leads") {
  const Panel p = additive_panel(5, 6, {4, 5}, tau_step, 67, 0.2);
  const std::vector<GattCell> pl = placebo_cells(p, ControlKind::NeverTreated, 2);
  REQUIRE(!pl.empty());
  for (const GattCell& c : pl) {
    CHECK(c.k <= -2);
    CHECK(c.k >= -3);
    // Parallel-trends design: placebo contrasts are near zero.
    CHECK(std::abs(c.estimate) < 0.5);
  }
  // A lead window must cover at least one placebo contrast.
  CHECK_THROWS_AS(placebo_cells(p, ControlKind::NeverTreated, 0), Error);
}
