// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "stagger/errors.hpp"
#include "stagger/panel.hpp"
#include "stagger/regression.hpp"

namespace stagger {

const char* const kAnchoringNote =
    "curvature class anchored at delta_{g,0} = delta_{g,-1} = 0; pre levels "
    "bounded by (1+DeltaR)*B for t < g, second differences bounded by Gamma "
    "for t >= g";

namespace {

void validate_rc(const RestrictionClass& rc) {
  if (rc.B < 0 || rc.Gamma < 0 || rc.DeltaR < 0)
    fail(Errc::BadConfig, "restriction-class parameters must be nonnegative");
}

}  // namespace

IdentifiedSet identified_set(const DeviationMap& map, const RestrictionClass& rc) {
  validate_rc(rc);
  IdentifiedSet out;
  out.note = kAnchoringNote;

  if (rc.kind == RestrictionClass::BiasBoundScalar) {
    const double L = (1.0 + rc.DeltaR) * rc.B;
    out.interval = {map.theta_hat - L, map.theta_hat + L};
    return out;
  }

  if (map.cohorts.empty() || map.T < 1)
    fail(Errc::BadConfig, "deviation map declares no delta paths");
  for (std::int64_t g : map.cohorts)
    if (g == kNever || g < -1000000 || g > 1000000)
      fail(Errc::BadConfig, "deviation paths require finite adoption times");
  for (const auto& [key, c] : map.coef) {
    (void)c;
    if (key.second < 1 || key.second > map.T)
      fail(Errc::BadConfig, "deviation coefficient outside 1..T");
    if (std::find(map.cohorts.begin(), map.cohorts.end(), key.first) ==
        map.cohorts.end())
      fail(Errc::BadConfig, "deviation coefficient for undeclared cohort");
  }

  // Variables: delta_{g,t} for each declared cohort, t = 1..T, stacked by
  // cohort. delta_{g,0} and delta_{g,-1} are implicit zeros.
  const int T = map.T;
  const int nco = static_cast<int>(map.cohorts.size());
  const int nv = nco * T;
  auto vid = [&](int ci, int t) { return ci * T + (t - 1); };

  const double inf = std::numeric_limits<double>::infinity();
  const double L = (1.0 + rc.DeltaR) * rc.B;

  LpProblem lp;
  lp.c = Eigen::VectorXd::Zero(nv);
  lp.lo = Eigen::VectorXd::Constant(nv, -inf);
  lp.hi = Eigen::VectorXd::Constant(nv, inf);
  for (int ci = 0; ci < nco; ++ci) {
    const std::int64_t g = map.cohorts[ci];
    for (int t = 1; t <= T; ++t) {
      if (t < g) {
        lp.lo[vid(ci, t)] = -L;
        lp.hi[vid(ci, t)] = L;
      }
      const auto it = map.coef.find({g, t});
      if (it != map.coef.end()) lp.c[vid(ci, t)] = it->second;
    }
  }

  // Curvature rows: |delta_t - 2 delta_{t-1} + delta_{t-2}| <= Gamma, t >= g,
  // with out-of-range lags read as zero.
  std::vector<Eigen::VectorXd> rows;
  for (int ci = 0; ci < nco; ++ci) {
    const int g = static_cast<int>(map.cohorts[ci]);
    for (int t = std::max(g, 1); t <= T; ++t) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
      row[vid(ci, t)] = 1.0;
      if (t - 1 >= 1) row[vid(ci, t - 1)] = -2.0;
      if (t - 2 >= 1) row[vid(ci, t - 2)] = 1.0;
      rows.push_back(std::move(row));
    }
  }
  const int m = 2 * static_cast<int>(rows.size());
  lp.A.resize(m, nv);
  lp.b.resize(m);
  lp.rel.resize(m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    lp.A.row(2 * r) = rows[r].transpose();
    lp.b[2 * r] = rc.Gamma;
    lp.rel[2 * r] = '<';
    lp.A.row(2 * r + 1) = -rows[r].transpose();
    lp.b[2 * r + 1] = rc.Gamma;
    lp.rel[2 * r + 1] = '<';
  }

  const LpSolution mn = solve_lp(lp);
  LpProblem lp_max = lp;
  lp_max.c = -lp.c;
  const LpSolution mx = solve_lp(lp_max);

  out.interval = {map.theta_hat + mn.objective, map.theta_hat - mx.objective};
  for (int ci = 0; ci < nco; ++ci)
    for (int t = 1; t <= T; ++t) {
      out.delta_lo[{map.cohorts[ci], t}] = mn.x[vid(ci, t)];
      out.delta_hi[{map.cohorts[ci], t}] = mx.x[vid(ci, t)];
    }
  return out;
}

double bias_bound(const RestrictionClass& rc, int t0) {
  validate_rc(rc);
  if (rc.kind == RestrictionClass::BiasBoundScalar) return (1.0 + rc.DeltaR) * rc.B;
  if (t0 < 2) fail(Errc::BadConfig, "bias_bound requires t0 >= 2");
  return (1.0 + rc.DeltaR) * rc.B + static_cast<double>(t0 - 2) * rc.Gamma;
}

Interval robust_interval(double theta, double se, const RestrictionClass& rc, int t0,
                         double z) {
  if (se < 0) fail(Errc::BadConfig, "negative standard error");
  const double half = z * se + bias_bound(rc, t0);
  return {theta - half, theta + half};
}

Calibration calibrate(const std::map<int, std::pair<double, double>>& pre_coefs,
                      double tau_ref, double kappa_B, double c_R, double eps_tau) {
  if (pre_coefs.size() < 2)
    fail(Errc::TooFewPrePeriods, "calibration needs at least 2 pre-period coefficients");
  if (kappa_B < 0 || c_R < 0 || eps_tau <= 0)
    fail(Errc::BadConfig, "calibration multipliers must be nonnegative (eps_tau > 0)");
  Calibration cal;
  cal.note = kAnchoringNote;
  for (const auto& [l, bs] : pre_coefs) {
    if (l >= 0) fail(Errc::BadConfig, "pre-period event times must be negative");
    cal.A_pre = std::max(cal.A_pre, std::abs(bs.first));
    if (bs.second > 0)
      cal.M_pre = std::max(cal.M_pre, std::abs(bs.first) / bs.second);
    const auto prev = pre_coefs.find(l - 1);
    if (prev != pre_coefs.end())
      cal.D_hat = std::max(cal.D_hat, std::abs(bs.first - prev->second.first));
  }
  cal.B_hat = kappa_B * cal.A_pre;
  cal.DeltaR_hat = c_R * cal.A_pre;
  cal.Gamma_hat = 100.0 * cal.D_hat / (std::abs(tau_ref) + eps_tau);
  return cal;
}

double holdout_quantile(std::vector<double> values, double q) {
  if (values.empty()) fail(Errc::BadConfig, "holdout_quantile: empty sample");
  if (!(q > 0.0 && q <= 1.0)) fail(Errc::BadConfig, "holdout_quantile: q in (0,1]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t r = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)) + 0.5);  // ceil, robust to fp
  if (r < 1) r = 1;
  if (r > n) r = n;
  return values[r - 1];
}

HoldoutResult holdout_B(const std::vector<double>& grid,
                        const std::function<double(double)>& criterion,
                        double threshold) {
  if (grid.empty()) fail(Errc::BadConfig, "holdout_B: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    fail(Errc::BadConfig, "holdout_B: grid must be ascending");
  HoldoutResult out;
  int first_ok = -1;
  bool gap_after_ok = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool ok = criterion(grid[i]) <= threshold;
    if (ok && first_ok < 0) first_ok = static_cast<int>(i);
    if (!ok && first_ok >= 0) gap_after_ok = true;
  }
  if (first_ok < 0) {
    // NoFeasibleB: cap at the grid maximum rather than abort.
    out.B = grid.back();
    out.capped = true;
    return out;
  }
  out.B = grid[static_cast<std::size_t>(first_ok)];
  out.nonmonotone = gap_after_ok;
  return out;
}

Frontier breakdown_frontier(const std::vector<double>& gamma_grid,
                            const std::function<Interval(double)>& interval_at) {
  if (gamma_grid.empty()) fail(Errc::BadConfig, "breakdown_frontier: empty grid");
  if (!std::is_sorted(gamma_grid.begin(), gamma_grid.end()))
    fail(Errc::BadConfig, "breakdown_frontier: grid must be ascending");
  for (double gm : gamma_grid) {
    if (interval_at(gm).contains(0.0)) return {gm, false};
  }
  return {gamma_grid.back(), true};
}

Frontier frontier_crossing(const std::vector<std::pair<double, double>>& curve,
                           double threshold) {
  if (curve.size() < 2) fail(Errc::BadConfig, "frontier_crossing: need >= 2 points");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (!(curve[i].first > curve[i - 1].first))
      fail(Errc::BadConfig, "frontier_crossing: x values must be strictly ascending");
  if (curve.front().second >= threshold) return {curve.front().first, false};
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].second >= threshold) {
      const double x0 = curve[i - 1].first, y0 = curve[i - 1].second;
      const double x1 = curve[i].first, y1 = curve[i].second;
      return {x0 + (x1 - x0) * (threshold - y0) / (y1 - y0), false};
    }
  }
  return {curve.back().first, true};
}

RegionResult sensitivity_region(const std::vector<RegionCellInput>& cells,
                                double cov_min, double len_factor) {
  const RegionCellInput* base = nullptr;
  for (const auto& c : cells)
    if (c.B == 0 && c.Gamma == 0 && c.DeltaR == 0) base = &c;
  if (!base)
    fail(Errc::MissingBaseline, "sensitivity_region needs the (0,0,0) baseline cell");

  RegionResult out;
  out.note = kAnchoringNote;
  out.len0 = base->length;
  if (base->interval.lo > 0)
    out.baseline_sign = 1;
  else if (base->interval.hi < 0)
    out.baseline_sign = -1;
  else
    out.baseline_sign = 0;

  out.cells.reserve(cells.size());
  for (const auto& c : cells) {
    RegionCell rc;
    rc.B = c.B;
    rc.Gamma = c.Gamma;
    rc.DeltaR = c.DeltaR;
    rc.length = c.length;
    rc.admissible = c.coverage >= cov_min && c.length <= len_factor * out.len0;
    rc.sign_stable =
        (out.baseline_sign > 0 && c.interval.lo > 0) ||
        (out.baseline_sign < 0 && c.interval.hi < 0);
    out.cells.push_back(rc);
  }
  return out;
}

BoxChoice box_select(const std::vector<double>& kappaB_grid,
                     const std::vector<double>& gamma_grid,
                     const std::vector<double>& cR_grid,
                     const std::function<bool(double, double, double)>& admissible) {
  if (kappaB_grid.empty() || gamma_grid.empty() || cR_grid.empty())
    fail(Errc::BadConfig, "box_select: empty grid");
  auto norm = [](const std::vector<double>& g, double v) {
    const double mx = *std::max_element(g.begin(), g.end());
    return mx > 0 ? v / mx : 0.0;
  };
  BoxChoice best;
  for (double kb : kappaB_grid)
    for (double gm : gamma_grid)
      for (double cr : cR_grid) {
        if (!admissible(kb, gm, cr)) continue;
        const double score =
            norm(kappaB_grid, kb) + norm(gamma_grid, gm) + norm(cR_grid, cr);
        const bool better =
            !best.found || score < best.score - 1e-12 ||
            (score < best.score + 1e-12 &&
             std::tie(kb, gm, cr) < std::tie(best.kappa_B, best.gamma, best.c_R));
        if (better) {
          best.kappa_B = kb;
          best.gamma = gm;
          best.c_R = cr;
          best.score = score;
          best.found = true;
        }
      }
  return best;
}

std::vector<double> default_kappaB_grid() { return {0.0, 0.25, 0.5, 1.0, 2.0}; }
std::vector<double> default_gamma_grid(bool percent_scale) {
  if (percent_scale) return {0.0, 1.0, 2.0, 5.0, 10.0};
  return {0.0, 0.05, 0.10, 0.15};
}
std::vector<double> default_cR_grid() { return {0.0, 0.5, 1.0, 2.0}; }

}  // namespace stagger
