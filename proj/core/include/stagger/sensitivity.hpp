// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_SENSITIVITY_HPP
#define STAGGER_SENSITIVITY_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace stagger {

// Restriction classes on parallel-trends deviations delta_{g,t} (the gap in
// untreated means between cohort g and the comparison group at period t).
//
// CurvatureBounded: pre-adoption levels satisfy |delta_{g,t}| <= (1+DeltaR)*B
// for t < g, and post-adoption paths bend by at most Gamma per period,
// |delta_{g,t} - 2 delta_{g,t-1} + delta_{g,t-2}| <= Gamma for t >= g. Paths
// are anchored by the convention delta_{g,0} = delta_{g,-1} = 0 (two implicit
// zeros just before the panel window), which closes the class and keeps the
// resulting programs bounded.
//
// BiasBoundScalar: a single scalar bias with |bias| <= (1+DeltaR)*B; Gamma is
// ignored.
struct RestrictionClass {
  enum Kind { CurvatureBounded, BiasBoundScalar } kind = CurvatureBounded;
  double B = 0, Gamma = 0, DeltaR = 0;
};

// Anchoring convention note attached to every sensitivity report.
extern const char* const kAnchoringNote;

struct Interval {
  double lo = 0, hi = 0;
  double length() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

// Linear dependence of an estimator on the deviations:
//   theta(delta) = theta_hat + sum coef[(g,t)] * delta_{g,t}.
// cohorts/T declare which delta paths exist (variables t = 1..T per cohort).
struct DeviationMap {
  double theta_hat = 0;
  std::map<std::pair<std::int64_t, int>, double> coef;
  std::vector<std::int64_t> cohorts;
  int T = 0;
};

// Sharp identified set of theta over the restriction class, by linear
// programming (CurvatureBounded) or in closed form (BiasBoundScalar).
// delta_lo / delta_hi are deviation paths attaining the endpoints.
struct IdentifiedSet {
  Interval interval;
  std::map<std::pair<std::int64_t, int>, double> delta_lo, delta_hi;
  std::string note;
};
IdentifiedSet identified_set(const DeviationMap& map, const RestrictionClass& rc);

// Closed-form worst-case bias for a contrast whose first treated period is
// t0: (1+DeltaR)*B + (t0-2)*Gamma for the curvature class, (1+DeltaR)*B for
// the scalar class.
double bias_bound(const RestrictionClass& rc, int t0);

// Wald interval inflated by the worst-case bias.
Interval robust_interval(double theta, double se, const RestrictionClass& rc, int t0,
                         double z = 1.96);

// Calibration from pre-period event-study coefficients (beta, se) keyed by
// event time (negative, ascending):
//   A_pre  = max |beta|                    M_pre = max |beta| / se
//   D_hat  = max |beta_l - beta_{l-1}| over adjacent observed pairs
//   B_hat = kappa_B * A_pre   DeltaR_hat = c_R * A_pre
//   Gamma_hat = 100 * D_hat / (|tau_ref| + eps_tau)
struct Calibration {
  double A_pre = 0, M_pre = 0, D_hat = 0;
  double B_hat = 0, DeltaR_hat = 0, Gamma_hat = 0;
  std::string note;
};
Calibration calibrate(const std::map<int, std::pair<double, double>>& pre_coefs,
                      double tau_ref, double kappa_B, double c_R,
                      double eps_tau = 1e-6);

// 0.95 holdout quantile: the ceil(0.95 n)-th order statistic.
double holdout_quantile(std::vector<double> values, double q = 0.95);

// Smallest grid value whose holdout criterion meets the threshold. If none is
// feasible the grid maximum is returned with capped set; a feasibility
// pattern that is not an up-set sets nonmonotone (the smallest feasible value
// is still returned).
struct HoldoutResult {
  double B = 0;
  bool capped = false, nonmonotone = false;
};
HoldoutResult holdout_B(const std::vector<double>& grid,
                        const std::function<double(double)>& criterion,
                        double threshold);

// Breakdown frontier on a grid. Interval mode: the smallest grid Gamma whose
// robust interval contains zero. Monitored-scalar mode: the first upward
// crossing of the threshold by linear interpolation along the curve.
struct Frontier {
  double gamma_star = 0;
  bool capped = false;
};
Frontier breakdown_frontier(const std::vector<double>& gamma_grid,
                            const std::function<Interval(double)>& interval_at);
Frontier frontier_crossing(const std::vector<std::pair<double, double>>& curve,
                           double threshold);

// Admissible-region summary over restriction-class cells, relative to the
// baseline cell (B, Gamma, DeltaR) = (0, 0, 0):
//   admissible  = coverage >= cov_min and length <= len_factor * baseline len
//   sign_stable = interval excludes 0 with the baseline's sign
struct RegionCellInput {
  double B = 0, Gamma = 0, DeltaR = 0;
  double coverage = 0, length = 0;
  Interval interval;
};
struct RegionCell {
  double B = 0, Gamma = 0, DeltaR = 0;
  bool admissible = false, sign_stable = false;
  double length = 0;
};
struct RegionResult {
  std::vector<RegionCell> cells;
  double len0 = 0;
  int baseline_sign = 0;  // 0 when the baseline interval straddles zero
  std::string note;
};
RegionResult sensitivity_region(const std::vector<RegionCellInput>& cells,
                                double cov_min = 0.90, double len_factor = 2.5);

// Reporting-default selection: the least conservative admissible triple
// (kappa_B, Gamma, c_R), scored by the sum of grid-normalized components,
// ties broken lexicographically.
struct BoxChoice {
  double kappa_B = 0, gamma = 0, c_R = 0;
  double score = 0;
  bool found = false;
};
BoxChoice box_select(const std::vector<double>& kappaB_grid,
                     const std::vector<double>& gamma_grid,
                     const std::vector<double>& cR_grid,
                     const std::function<bool(double, double, double)>& admissible);

std::vector<double> default_kappaB_grid();                 // {0, 0.25, 0.5, 1, 2}
std::vector<double> default_gamma_grid(bool percent_scale); // percent or absolute
std::vector<double> default_cR_grid();                     // {0, 0.5, 1, 2}

}  // namespace stagger

#endif  // STAGGER_SENSITIVITY_HPP
