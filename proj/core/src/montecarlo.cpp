// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "stagger/diagnostics.hpp"
#include "stagger/errors.hpp"
#include "stagger/group_time.hpp"
#include "stagger/rng.hpp"
#include "stagger/scores.hpp"
#include "stagger/twfe.hpp"

namespace stagger {

namespace {
constexpr std::array<std::int64_t, 4> kAdoptions = {4, 6, 8, 10};
constexpr std::array<double, 4> kCohortScale = {0.8, 1.0, 1.2, 1.4};
constexpr std::array<double, 4> kCohortSign = {+1.0, -1.0, +1.0, -1.0};

int adoption_index(std::int64_t A) {
  for (std::size_t j = 0; j < kAdoptions.size(); ++j)
    if (kAdoptions[j] == A) return static_cast<int>(j);
  return -1;
}
}  // namespace

double mc81_tau(std::int64_t A, int k) {
  if (adoption_index(A) < 0 || k < 0) return 0.0;
  const double m = (k == 0) ? 0.5 : (k == 1) ? 0.75 : 1.0;
  return kCohortScale[adoption_index(A)] * m;
}

double mc81_theta_star() {
  double acc = 0;
  for (std::int64_t A : kAdoptions)
    for (int l = 0; l <= 3; ++l) acc += mc81_tau(A, l) / 16.0;
  return acc;
}

double mc81_violation(const Mc81Spec& spec, std::int64_t A, int t) {
  const int j = adoption_index(A);
  if (j < 0 || spec.noiseless) return 0.0;
  const double Tm1 = static_cast<double>(spec.T - 1);
  const double a = static_cast<double>(A);
  double v;
  if (t < A) {
    // Linear pre-trend in normalized time, centered over the pre segment:
    // mean of (t-1)/(T-1) over t = 1..A-1 is (A-2)/(2(T-1)).
    const double centered = (static_cast<double>(t) - 1.0) / Tm1 - (a - 2.0) / (2.0 * Tm1);
    v = spec.DeltaR * spec.B * centered;
  } else {
    // Post-adoption drift in normalized event time, centered over t = A..T:
    // mean of (t-A)/(T-1) is (T-A)/(2(T-1)).
    const double centered =
        (static_cast<double>(t) - a) / Tm1 -
        (static_cast<double>(spec.T) - a) / (2.0 * Tm1);
    v = spec.Gamma * centered;
  }
  return kCohortSign[j] * v;
}

Panel simulate_mc81(const Mc81Spec& spec, std::uint64_t seed, Eigen::MatrixXd* u_out) {
  if (spec.n < 10 || spec.T != 12)
    fail(Errc::BadConfig, "mc81 design requires T = 12 and a nontrivial n");
  if (spec.dgp < 1 || spec.dgp > 3) fail(Errc::BadConfig, "mc81 dgp must be 1..3");
  Rng rng(seed);
  const int n = spec.n, T = spec.T;

  std::vector<double> lambda(T);
  for (int t = 0; t < T; ++t) lambda[t] = rng.normal(0.0, 0.5);

  PanelInput in;
  const int dx = spec.noiseless ? 0 : 1;
  in.x.resize(dx);
  if (spec.dgp == 3) in.observed.reserve(static_cast<std::size_t>(n) * T);
  if (u_out) u_out->setZero(n, T);

  const std::vector<double> arm_probs(5, 0.2);
  for (int i = 0; i < n; ++i) {
    const int arm = rng.categorical(arm_probs);
    const std::int64_t A = (arm < 4) ? kAdoptions[arm] : kNever;
    const double alpha = rng.normal();

    std::vector<double> X(T, 0.0);
    if (!spec.noiseless) {
      X[0] = rng.normal();
      for (int t = 1; t < T; ++t) X[t] = 0.5 * X[t - 1] + rng.normal();
    }

    std::vector<double> u(T, 0.0);
    if (!spec.noiseless) {
      switch (spec.dgp) {
        case 1:
          for (int t = 0; t < T; ++t) u[t] = rng.normal();
          break;
        case 2:
          u[0] = rng.normal();
          for (int t = 1; t < T; ++t)
            u[t] = 0.5 * u[t - 1] + rng.normal(0.0, std::sqrt(0.75));
          break;
        case 3:
          for (int t = 0; t < T; ++t) u[t] = rng.student_t(5);
          break;
      }
    }

    std::vector<double> y(T);
    for (int t = 1; t <= T; ++t) {
      const bool treated = (A != kNever && A <= t);
      double v = alpha + lambda[t - 1] + (spec.noiseless ? 0.0 : X[t - 1]) + u[t - 1];
      if (A != kNever) v += mc81_violation(spec, A, t);
      if (treated) v += mc81_tau(A, static_cast<int>(t - A));
      y[t - 1] = v;
    }

    std::vector<std::uint8_t> s(T, 1);
    if (spec.dgp == 3) {
      // Outcome-dependent attrition on the latent lagged outcome.
      double ylag = 0.0;
      for (int t = 1; t <= T; ++t) {
        const bool treated = (A != kNever && A <= t);
        const double z = 1.25 - 0.35 * (treated ? 1.0 : 0.0) - 0.10 * ylag;
        s[t - 1] = rng.bernoulli(1.0 / (1.0 + std::exp(-z))) ? 1 : 0;
        ylag = y[t - 1];
      }
    }

    for (int t = 1; t <= T; ++t) {
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.outcome.push_back(y[t - 1]);
      in.cohort.push_back(A);
      if (dx > 0) in.x[0].push_back(X[t - 1]);
      if (spec.dgp == 3) in.observed.push_back(s[t - 1]);
      if (u_out) (*u_out)(i, t - 1) = u[t - 1];
    }
  }
  return build_panel(in);
}

Panel simulate_mc84(const Mc84Spec& spec, std::uint64_t seed) {
  if (spec.n < 4 || spec.n % 2 != 0)
    fail(Errc::BadConfig, "mc84 requires an even number of units");
  if (spec.t0 < 3 || spec.t0 > spec.T)
    fail(Errc::BadConfig, "mc84 adoption period out of range");
  Rng rng(seed);
  PanelInput in;
  for (int i = 0; i < spec.n; ++i) {
    const bool treated_arm = i < spec.n / 2;
    const double alpha = rng.normal();
    for (int t = 1; t <= spec.T; ++t) {
      double y = alpha + rng.normal();
      if (treated_arm) {
        y += spec.DeltaR * spec.Gamma * static_cast<double>(t - 1);
        if (t >= spec.t0) y += spec.tau;
      }
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.outcome.push_back(y);
      in.cohort.push_back(treated_arm ? spec.t0 : kNever);
    }
  }
  return build_panel(in);
}

Mc84CellResult mc84_run(const Mc84Spec& spec, int R, std::uint64_t base_seed,
                        int threads) {
  if (R < 1) fail(Errc::BadConfig, "mc84_run: R must be positive");
  const int P = spec.t0 - 1;
  if (P < 2 || P % 2 != 0)
    fail(Errc::BadConfig, "mc84 placebo split needs an even pre window");
  const double bound = bias_bound(
      {RestrictionClass::CurvatureBounded, spec.B, spec.Gamma, spec.DeltaR}, spec.t0);

  struct Rep {
    double tpl = 0, sepl = 0;  // placebo contrast and its se
    double tm = 0, sem = 0;    // main contrast and its se
  };
  std::vector<Rep> reps(static_cast<std::size_t>(R));

  auto work = [&](int r) {
    const Panel p = simulate_mc84(spec, hash64(base_seed, static_cast<std::uint64_t>(r)));
    // Per-unit contrasts; two-sample means with unit-level variances.
    double s1 = 0, q1 = 0, s0 = 0, q0 = 0;    // placebo sums/squares by arm
    double a1 = 0, b1 = 0, a0 = 0, b0 = 0;    // main sums/squares by arm
    int n1 = 0, n0 = 0;
    for (int i = 0; i < p.n(); ++i) {
      double pre1 = 0, pre2 = 0, pre = 0, post = 0;
      for (int t = 1; t <= P / 2; ++t) pre1 += p.y(i, t);
      for (int t = P / 2 + 1; t <= P; ++t) pre2 += p.y(i, t);
      for (int t = 1; t <= P; ++t) pre += p.y(i, t);
      for (int t = spec.t0; t <= p.T(); ++t) post += p.y(i, t);
      const double c = pre2 / (P / 2) - pre1 / (P / 2);
      const double m = post / (p.T() - spec.t0 + 1) - pre / P;
      if (p.never_treated(i)) {
        s0 += c;
        q0 += c * c;
        a0 += m;
        b0 += m * m;
        ++n0;
      } else {
        s1 += c;
        q1 += c * c;
        a1 += m;
        b1 += m * m;
        ++n1;
      }
    }
    Rep rep;
    const double mc1 = s1 / n1, mc0 = s0 / n0;
    const double vc1 = (q1 - n1 * mc1 * mc1) / (n1 - 1);
    const double vc0 = (q0 - n0 * mc0 * mc0) / (n0 - 1);
    rep.tpl = mc1 - mc0;
    rep.sepl = std::sqrt(vc1 / n1 + vc0 / n0);
    const double mm1 = a1 / n1, mm0 = a0 / n0;
    const double vm1 = (b1 - n1 * mm1 * mm1) / (n1 - 1);
    const double vm0 = (b0 - n0 * mm0 * mm0) / (n0 - 1);
    rep.tm = mm1 - mm0;
    rep.sem = std::sqrt(vm1 / n1 + vm0 / n0);
    reps[static_cast<std::size_t>(r)] = rep;
  };

  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min(nthreads, R);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int w = 0; w < nthreads; ++w)
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) work(r);
    });
  for (auto& th : pool) th.join();

  Mc84CellResult out;
  out.R = R;
  double se_sum = 0, se2_sum = 0, cw = 0, lw = 0, cr = 0, lr = 0;
  double r10 = 0, r05 = 0, r01 = 0;
  for (const Rep& rep : reps) {
    const double z = std::abs(rep.tpl / rep.sepl);
    r10 += z > 1.645;
    r05 += z > 1.96;
    r01 += z > 2.576;
    const double err = rep.tm - spec.tau;
    se_sum += err;
    se2_sum += err * err;
    const double hw = 1.96 * rep.sem;
    cw += std::abs(err) <= hw;
    lw += 2 * hw;
    cr += std::abs(err) <= hw + bound;
    lr += 2 * (hw + bound);
  }
  out.rej10 = r10 / R;
  out.rej05 = r05 / R;
  out.rej01 = r01 / R;
  out.bias = se_sum / R;
  out.rmse = std::sqrt(se2_sum / R);
  out.cov_wald = cw / R;
  out.len_wald = lw / R;
  out.cov_robust = cr / R;
  out.len_robust = lr / R;
  return out;
}

Mc85Spec mc85_default() {
  Mc85Spec s;
  s.sigma_x.resize(2, 2);
  s.sigma_x << 1.0, 0.3, 0.3, 1.0;
  s.gamma = {
      (Eigen::VectorXd(2) << 0.8, -0.4).finished(),
      (Eigen::VectorXd(2) << 0.4, 0.4).finished(),
      (Eigen::VectorXd(2) << -0.4, 0.8).finished(),
      (Eigen::VectorXd(2) << -0.8, -0.4).finished(),
      (Eigen::VectorXd(2) << 0.0, 0.0).finished(),  // never treated
  };
  s.beta_x = (Eigen::VectorXd(2) << 1.0, -0.5).finished();
  s.kappa_x = (Eigen::VectorXd(2) << 0.08, -0.04).finished();
  return s;
}

double mc85_tau(const Mc85Spec& spec, std::int64_t g, int k) {
  if (k < 0) return 0.0;
  const double kf = static_cast<double>(k);
  return spec.a0 + spec.a1 * static_cast<double>(g) / spec.T +
         spec.a2 * (1.0 - std::exp(-kf / spec.ell)) +
         spec.a3 * std::sin(2.0 * std::numbers::pi * kf / spec.Kper);
}

Panel simulate_mc85(const Mc85Spec& spec, std::uint64_t seed) {
  const int dxn = static_cast<int>(spec.beta_x.size());
  if (spec.sigma_x.rows() != dxn || spec.sigma_x.cols() != dxn ||
      spec.kappa_x.size() != dxn)
    fail(Errc::BadConfig, "mc85 covariate dimensions inconsistent");
  if (spec.gamma.size() != spec.adoptions.size() + 1)
    fail(Errc::BadConfig, "mc85 needs one membership score per arm (never last)");
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(spec.sigma_x).matrixL();

  Rng rng(seed);
  std::vector<double> lambda(static_cast<std::size_t>(spec.T));
  for (int t = 0; t < spec.T; ++t) lambda[t] = rng.normal(0.0, spec.sigma_lambda);

  PanelInput in;
  in.x.resize(dxn);
  const int arms = static_cast<int>(spec.gamma.size());
  std::vector<double> w(static_cast<std::size_t>(arms));
  for (int i = 0; i < spec.n; ++i) {
    Eigen::VectorXd z(dxn);
    for (int j = 0; j < dxn; ++j) z[j] = rng.normal();
    const Eigen::VectorXd x = chol * z;
    for (int a = 0; a < arms; ++a)
      w[static_cast<std::size_t>(a)] = std::exp(spec.gamma[a].dot(x));
    const int arm = rng.categorical(w);
    const std::int64_t g =
        (arm < arms - 1) ? spec.adoptions[static_cast<std::size_t>(arm)] : kNever;
    const double mu = rng.normal(0.0, spec.sigma_mu);
    for (int t = 1; t <= spec.T; ++t) {
      double y = mu + lambda[t - 1] + spec.rho_trend * t + spec.beta_x.dot(x) +
                 t * spec.kappa_x.dot(x) + rng.normal(0.0, spec.sigma_eta);
      if (g != kNever && g <= t) y += mc85_tau(spec, g, static_cast<int>(t - g));
      in.unit.push_back(i + 1);
      in.time.push_back(t);
      in.outcome.push_back(y);
      in.cohort.push_back(g);
      for (int j = 0; j < dxn; ++j) in.x[j].push_back(x[j]);
    }
  }
  return build_panel(in);
}

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::GroupTime: return "group-time";
    case EstimatorKind::DrCrossfit: return "dr-crossfit";
    case EstimatorKind::Twfe: return "twfe";
    case EstimatorKind::Imputation: return "imputation";
  }
  return "?";
}

namespace {

struct RepOutcome {
  struct Est {
    bool ok = false;
    double theta = 0, se = 0;
  };
  std::array<Est, 4> est;
  // Per-cohort-horizon components for group-time (0) and dr-crossfit (1).
  std::array<std::array<double, 16>, 2> comp{};
  std::array<bool, 2> comp_ok{false, false};
  double wald_p = 1.0;
  bool wald_ok = false;
  std::array<double, 4> diag_N{}, diag_C{}, diag_dist{};
  bool diag_ok = false;
};

double median_abs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CellResult run_cell(const Mc81Spec& spec, const std::vector<EstimatorKind>& estimators,
                    int R, std::uint64_t base_seed, const RunCellOptions& opt) {
  if (R < 2) fail(Errc::BadConfig, "run_cell: need at least 2 replications");
  const double theta_star = mc81_theta_star();
  const RestrictionClass rc{RestrictionClass::CurvatureBounded, spec.B, spec.Gamma,
                            spec.DeltaR};
  const int t0 = static_cast<int>(kAdoptions.front());
  const double bound = bias_bound(rc, t0);

  auto wants = [&](EstimatorKind k) {
    return std::find(estimators.begin(), estimators.end(), k) != estimators.end();
  };
  const bool need_twfe = wants(EstimatorKind::Twfe) || opt.diagnostics;

  std::vector<RepOutcome> reps(static_cast<std::size_t>(R));
  auto work = [&](int r) {
    RepOutcome& out = reps[static_cast<std::size_t>(r)];
    const std::uint64_t rep_seed = hash64(base_seed, static_cast<std::uint64_t>(r));
    const Panel p = simulate_mc81(spec, rep_seed);

    // Pooled group-time / dr estimates: equal cohort weights 1/4, horizons
    // 0..3 averaged, matching the declared pooled target. The last cohort's
    // horizon 3 falls past the panel (t = 13 > T); the evaluation period is
    // truncated to T, which is unbiased here because the effect profile is
    // flat from horizon 2 on.
    auto pooled = [&](bool dr) {
      const int slot = dr ? 1 : 0;
      double theta = 0;
      Eigen::VectorXd influence = Eigen::VectorXd::Zero(p.n());
      for (std::size_t j = 0; j < kAdoptions.size(); ++j) {
        const std::int64_t g = kAdoptions[j];
        for (int l = 0; l <= 3; ++l) {
          const int t = std::min(static_cast<int>(g) + l, spec.T);
          double est;
          Eigen::VectorXd inf;
          if (dr) {
            const CrossfitResult c = crossfit_gatt(p, g, t, opt.crossfit_folds,
                                                   hash64(rep_seed, 0x666f6c64ULL));
            est = c.theta;
            inf = c.influence;
          } else {
            GattCell c = gatt_cell(p, g, t, ControlKind::NeverTreated);
            est = c.estimate;
            inf = std::move(c.influence);
          }
          out.comp[slot][j * 4 + static_cast<std::size_t>(l)] = est;
          theta += est / 16.0;
          influence += inf / 16.0;
        }
      }
      out.comp_ok[slot] = true;
      RepOutcome::Est e;
      e.ok = true;
      e.theta = theta;
      e.se = std::sqrt(influence.squaredNorm()) / p.n();
      return e;
    };

    if (wants(EstimatorKind::GroupTime)) {
      try {
        out.est[0] = pooled(false);
      } catch (const Error&) {
      }
    }
    if (wants(EstimatorKind::DrCrossfit)) {
      try {
        out.est[1] = pooled(true);
      } catch (const Error&) {
      }
    }

    TwfeFit fit;
    bool have_fit = false;
    if (need_twfe) {
      try {
        fit = twfe_event_study(p, default_window(p));
        have_fit = true;
      } catch (const Error&) {
      }
    }
    if (wants(EstimatorKind::Twfe) && have_fit) {
      double theta = 0, var = 0;
      bool ok = true;
      std::array<int, 4> idx{};
      for (int k = 0; k <= 3; ++k) {
        const int j = fit.index_of(k);
        if (j < 0 || !fit.retained[static_cast<std::size_t>(j)]) {
          ok = false;
          break;
        }
        idx[static_cast<std::size_t>(k)] = j;
        theta += fit.beta[j] / 4.0;
      }
      if (ok) {
        for (int a = 0; a <= 3; ++a)
          for (int b = 0; b <= 3; ++b)
            var += fit.vcov(idx[static_cast<std::size_t>(a)],
                            idx[static_cast<std::size_t>(b)]) /
                   16.0;
        out.est[2] = {true, theta, std::sqrt(std::max(0.0, var))};
      }
    }
    if (wants(EstimatorKind::Imputation)) {
      try {
        const ImputationResult imp = imputation_event_study(p);
        double theta = 0;
        int found = 0;
        for (const auto& row : imp.rows)
          if (row.k >= 0 && row.k <= 3) {
            theta += row.estimate / 4.0;
            ++found;
          }
        if (found == 4)
          out.est[3] = {true, theta, std::numeric_limits<double>::quiet_NaN()};
      } catch (const Error&) {
      }
    }

    // Pooled pre-trend Wald over event times -3 and -2 (the -1 contrast is
    // identically zero under base-period normalization, so the joint null has
    // two free components). The pooled covariance is block-diagonal across
    // cohorts: per-cohort 2x2 blocks from influence functions, weight 1/16.
    try {
      Eigen::Vector2d delta = Eigen::Vector2d::Zero();
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (std::int64_t g : kAdoptions) {
        Eigen::MatrixXd inf2 = Eigen::MatrixXd::Zero(p.n(), 2);
        for (int c = 0; c < 2; ++c) {
          const int t = static_cast<int>(g) + (c == 0 ? -3 : -2);
          GattCell cell = gatt_cell(p, g, t, ControlKind::NeverTreated);
          delta[c] += cell.estimate / 4.0;
          inf2.col(c) = cell.influence;
        }
        cov += (inf2.transpose() * inf2) /
               (16.0 * static_cast<double>(p.n()) * p.n());
      }
      const double w = delta.dot(cov.llt().solve(delta));
      out.wald_p = std::exp(-0.5 * w);  // chi-square(2) survival function
      out.wald_ok = true;
    } catch (const Error&) {
    }

    if (opt.diagnostics && have_fit) {
      try {
        const TwfeWeights tw = implicit_weights(p, fit.window);
        const DiagnosticsReport rep = weight_diagnostics(tw);
        bool all = true;
        for (int k = 0; k <= 3; ++k) {
          const DiagnosticsRow* row = nullptr;
          for (const auto& rr : rep.rows)
            if (rr.k == k) row = &rr;
          const int j = fit.index_of(k);
          if (!row || !row->identified || j < 0) {
            all = false;
            break;
          }
          // Declared aggregand truth at this horizon: sample-share weights
          // over cohorts with the horizon in window.
          double wsum = 0, th = 0;
          for (std::int64_t g : kAdoptions) {
            if (g + k > spec.T) continue;
            const double ng = static_cast<double>(p.cohort_count(g));
            wsum += ng;
            th += ng * mc81_tau(g, k);
          }
          th /= wsum;
          out.diag_N[static_cast<std::size_t>(k)] = row->N;
          out.diag_C[static_cast<std::size_t>(k)] = row->C;
          out.diag_dist[static_cast<std::size_t>(k)] = fit.beta[j] - th;
        }
        out.diag_ok = all;
      } catch (const Error&) {
      }
    }
  };

  int nthreads = opt.threads > 0 ? opt.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min(nthreads, R);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int w = 0; w < nthreads; ++w)
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) work(r);
    });
  for (auto& th : pool) th.join();

  // ---- Sequential reduction (fixed order regardless of thread count). ----
  CellResult res;
  res.spec = spec;
  res.R = R;
  res.theta_star = theta_star;

  for (EstimatorKind kind : estimators) {
    const int slot = static_cast<int>(kind);
    EstimatorMetrics m;
    m.kind = kind;
    std::vector<double> errs;
    double sum = 0, sum2 = 0;
    double cw = 0, lw = 0, uw = 0, crb = 0, lrb = 0, urb = 0;
    int n_se = 0;
    for (const RepOutcome& rep : reps) {
      const auto& e = rep.est[static_cast<std::size_t>(slot)];
      if (!e.ok) {
        ++m.n_fail;
        continue;
      }
      ++m.n_ok;
      const double err = e.theta - theta_star;
      errs.push_back(std::abs(err));
      sum += err;
      sum2 += err * err;
      if (std::isfinite(e.se)) {
        ++n_se;
        const double hw = 1.96 * e.se;
        cw += std::abs(err) <= hw;
        lw += 2 * hw;
        uw += 2 * err;  // (U + L) - 2 theta_star for a symmetric interval
        crb += std::abs(err) <= hw + bound;
        lrb += 2 * (hw + bound);
        urb += 2 * err;
      }
    }
    if (m.n_ok > 0) {
      m.bias = sum / m.n_ok;
      m.rmse = std::sqrt(sum2 / m.n_ok);
      m.medae = median_abs(errs);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (n_se > 0) {
      m.cov_wald = cw / n_se;
      m.len_wald = lw / n_se;
      m.utex_wald = uw / n_se;
      m.cov_robust = crb / n_se;
      m.len_robust = lrb / n_se;
      m.utex_robust = urb / n_se;
    } else {
      m.cov_wald = m.len_wald = m.utex_wald = nan;
      m.cov_robust = m.len_robust = m.utex_robust = nan;
    }
    double len0 = opt.len0_robust;
    if (!std::isfinite(len0) && spec.B == 0 && spec.Gamma == 0 && spec.DeltaR == 0)
      len0 = m.len_robust;
    if (n_se > 0 && std::isfinite(len0))
      m.admissible = (m.cov_robust >= 0.90 && m.len_robust <= 2.5 * len0) ? 1.0 : 0.0;
    else
      m.admissible = nan;
    res.estimators.push_back(m);

    if (kind == EstimatorKind::GroupTime || kind == EstimatorKind::DrCrossfit) {
      const int cslot = kind == EstimatorKind::GroupTime ? 0 : 1;
      std::vector<ComponentMetric> comps;
      for (std::size_t j = 0; j < kAdoptions.size(); ++j)
        for (int l = 0; l <= 3; ++l) {
          ComponentMetric cm;
          cm.g = kAdoptions[j];
          cm.l = l;
          const double truth = mc81_tau(cm.g, l);
          double s = 0, s2 = 0;
          for (const RepOutcome& rep : reps) {
            if (!rep.comp_ok[static_cast<std::size_t>(cslot)]) continue;
            const double err =
                rep.comp[static_cast<std::size_t>(cslot)][j * 4 + static_cast<std::size_t>(l)] -
                truth;
            s += err;
            s2 += err * err;
            ++cm.n_ok;
          }
          if (cm.n_ok > 0) {
            cm.bias = s / cm.n_ok;
            cm.rmse = std::sqrt(s2 / cm.n_ok);
          }
          comps.push_back(cm);
        }
      res.components[kind] = std::move(comps);
    }
  }

  int n_wald = 0;
  for (const RepOutcome& rep : reps) {
    if (!rep.wald_ok) continue;
    ++n_wald;
    res.rejpre10 += rep.wald_p < 0.10;
    res.rejpre05 += rep.wald_p < 0.05;
    res.rejpre01 += rep.wald_p < 0.01;
  }
  if (n_wald > 0) {
    res.rejpre10 /= n_wald;
    res.rejpre05 /= n_wald;
    res.rejpre01 /= n_wald;
  }

  if (opt.diagnostics) {
    for (int k = 0; k <= 3; ++k) {
      std::vector<double> N, C, D;
      for (const RepOutcome& rep : reps) {
        if (!rep.diag_ok) continue;
        N.push_back(rep.diag_N[static_cast<std::size_t>(k)]);
        C.push_back(rep.diag_C[static_cast<std::size_t>(k)]);
        D.push_back(rep.diag_dist[static_cast<std::size_t>(k)]);
      }
      DiagnosticsAssociation da;
      da.k = k;
      if (N.size() >= 2) {
        const DistortionSummary ds = distortion_summary(D, N, C);
        da.corr_dist_N = ds.corr_N;
        da.corr_dist_C = ds.corr_C;
        da.degenerate_N = ds.degenerate_N;
        da.degenerate_C = ds.degenerate_C;
        for (double v : N) da.mean_N += v / N.size();
        for (double v : C) da.mean_C += v / C.size();
        for (double v : D) da.mean_dist += v / D.size();
      }
      res.diagnostics.push_back(da);
    }
  }
  return res;
}

}  // namespace stagger
