// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_MONTECARLO_HPP
#define STAGGER_MONTECARLO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "stagger/panel.hpp"
#include "stagger/sensitivity.hpp"

namespace stagger {

// ---------------------------------------------------------------------------
// Staggered-adoption design: five equal-probability arms (adoption at 4, 6,
// 8, 10, or never) on a T = 12 panel with unit and period effects, an AR(1)
// covariate, cohort-by-horizon treatment effects tau_g(k) = h_g * m(k), and a
// violation term controlled by (DeltaR, B, Gamma): before adoption a linear
// pre-trend of slope DeltaR*B per normalized period, after adoption a drift
// of slope Gamma, each segment centered to mean zero within itself and the
// sign alternating (+,-,+,-) across cohorts.
//
// dgp selects the error law: 1 = iid N(0,1); 2 = AR(1) with lag 0.5 and
// innovation variance 0.75; 3 = t(5) errors plus outcome-dependent attrition
// (logit 1.25 - 0.35 D - 0.10 Y_lag on the latent lagged outcome).
// ---------------------------------------------------------------------------
struct Mc81Spec {
  int dgp = 1;
  int n = 5000;
  int T = 12;
  double DeltaR = 0, B = 0, Gamma = 0;
  bool noiseless = false;  // drop noise, covariate and violation terms
};

// u_out (optional) receives the n x T error draws for error-law checks.
Panel simulate_mc81(const Mc81Spec& spec, std::uint64_t seed,
                    Eigen::MatrixXd* u_out = nullptr);

// Deterministic violation value for cohort A at period t (zero for never).
double mc81_violation(const Mc81Spec& spec, std::int64_t A, int t);

// True cohort-horizon effect tau_A(k); zero off the treated support.
double mc81_tau(std::int64_t A, int k);

// Pooled target: equal cohort weights, horizons 0..3 averaged.
double mc81_theta_star();

// ---------------------------------------------------------------------------
// Two-arm design for placebo power and breakdown frontiers: a treated arm
// adopting at t0 on a T-period panel, with a linear violation drift of slope
// DeltaR * Gamma per period in the treated arm. B never enters the outcome
// law, which the placebo analysis should (and does) detect as invariance.
// ---------------------------------------------------------------------------
struct Mc84Spec {
  int n = 2000;  // split evenly between arms
  int T = 8;
  int t0 = 5;
  double tau = 1.0;
  double DeltaR = 0, B = 0, Gamma = 0;
};
Panel simulate_mc84(const Mc84Spec& spec, std::uint64_t seed);

struct Mc84CellResult {
  double rej10 = 0, rej05 = 0, rej01 = 0;  // placebo rejection rates
  double bias = 0, rmse = 0;
  double cov_wald = 0, len_wald = 0;
  double cov_robust = 0, len_robust = 0;
  int R = 0;
};
// Common random numbers across cells: replication r uses hash64(base_seed, r)
// regardless of (DeltaR, B, Gamma), so cell contrasts are paired.
Mc84CellResult mc84_run(const Mc84Spec& spec, int R, std::uint64_t base_seed,
                        int threads);

// ---------------------------------------------------------------------------
// Covariate-confounded adoption design: time-invariant X, multinomial-logit
// cohort membership, untreated outcomes with cohort-specific loadings that
// keep conditional parallel trends in increments, and smooth tau_g(k).
// ---------------------------------------------------------------------------
struct Mc85Spec {
  int n = 2000;
  int T = 12;
  std::vector<std::int64_t> adoptions = {4, 6, 8, 10};
  Eigen::MatrixXd sigma_x;               // covariance of X
  std::vector<Eigen::VectorXd> gamma;    // membership scores: adoptions order, never last
  Eigen::VectorXd beta_x, kappa_x;       // level and trend loadings on X
  double rho_trend = 0.10;
  double sigma_mu = 1.0, sigma_lambda = 0.5, sigma_eta = 1.0;
  double a0 = 0.3, a1 = 0.6, a2 = 0.5, a3 = 0.15, ell = 2.0, Kper = 8.0;
};
Mc85Spec mc85_default();
Panel simulate_mc85(const Mc85Spec& spec, std::uint64_t seed);
double mc85_tau(const Mc85Spec& spec, std::int64_t g, int k);

// ---------------------------------------------------------------------------
// Replication harness over the staggered design.
// ---------------------------------------------------------------------------
enum class EstimatorKind { GroupTime, DrCrossfit, Twfe, Imputation };
const char* estimator_name(EstimatorKind k);

struct EstimatorMetrics {
  EstimatorKind kind = EstimatorKind::GroupTime;
  int n_ok = 0, n_fail = 0;
  double bias = 0, rmse = 0, medae = 0;
  double cov_wald = 0, len_wald = 0, utex_wald = 0;
  double cov_robust = 0, len_robust = 0, utex_robust = 0;
  double admissible = 0;  // NaN when no baseline length is available
};
struct ComponentMetric {
  std::int64_t g = 0;
  int l = 0;
  double bias = 0, rmse = 0;
  int n_ok = 0;
};
struct DiagnosticsAssociation {
  int k = 0;
  double mean_N = 0, mean_C = 0, mean_dist = 0;
  double corr_dist_N = 0, corr_dist_C = 0;
  bool degenerate_N = false, degenerate_C = false;
};
struct CellResult {
  Mc81Spec spec;
  int R = 0;
  double theta_star = 0;
  std::vector<EstimatorMetrics> estimators;
  std::map<EstimatorKind, std::vector<ComponentMetric>> components;
  std::vector<DiagnosticsAssociation> diagnostics;  // horizons 0..3
  double rejpre10 = 0, rejpre05 = 0, rejpre01 = 0;  // pooled pre-trend Wald
};

struct RunCellOptions {
  int threads = 0;              // 0 = hardware concurrency
  int crossfit_folds = 5;
  bool diagnostics = true;      // per-replication implicit-weight diagnostics
  double len0_robust = std::numeric_limits<double>::quiet_NaN();
};
// Runs R replications at one violation cell. Per-replication estimator
// failures are counted, never fatal. Results are byte-stable across thread
// counts: replication r depends only on hash64(base_seed, r) and the
// reduction order is fixed.
CellResult run_cell(const Mc81Spec& spec, const std::vector<EstimatorKind>& estimators,
                    int R, std::uint64_t base_seed, const RunCellOptions& opt = {});

}  // namespace stagger

#endif  // STAGGER_MONTECARLO_HPP
