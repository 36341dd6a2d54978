// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stagger/errors.hpp"
#include "stagger/regression.hpp"
#include "stagger/rng.hpp"

namespace stagger {

namespace {

constexpr double kOverlapEps = 1e-6;

// Comparison sample for a (g, t) contrast: cohort-g and never-treated units
// observed at both t and the base period, with base-period covariates.
struct Sample {
  std::vector<int> idx;           // panel unit indices
  std::vector<std::uint8_t> is_g; // 1 for cohort-g units
  Eigen::VectorXd ytilde;         // long differences
  Eigen::MatrixXd X;              // (1, x at base)
  int base = 0;
  int n_g = 0;
};

Sample build_sample(const Panel& p, std::int64_t g, int t) {
  const int base = static_cast<int>(g - 1);
  if (g == kNever || p.cohort_count(g) == 0)
    fail(Errc::BadConfig, "no units adopt at " + std::to_string(g));
  if (base < 1 || base > p.T())
    fail(Errc::MissingBasePeriod,
         "base period " + std::to_string(base) + " outside the panel window");
  if (t < 1 || t > p.T() || t == base)
    fail(Errc::BadConfig, "period t=" + std::to_string(t) + " invalid");

  Sample s;
  s.base = base;
  for (int i = 0; i < p.n(); ++i) {
    const bool ing = p.cohort(i) == g;
    if (!ing && !p.never_treated(i)) continue;
    if (!(p.observed(i, t) && p.observed(i, base))) continue;
    s.idx.push_back(i);
    s.is_g.push_back(ing ? 1 : 0);
    if (ing) ++s.n_g;
  }
  const int ns = static_cast<int>(s.idx.size());
  if (s.n_g == 0)
    fail(Errc::MissingCell, "no cohort units observed at both periods");
  if (ns == s.n_g)
    fail(Errc::EmptyControlSet, "no never-treated units observed at both periods");
  s.ytilde.resize(ns);
  s.X.resize(ns, p.dx() + 1);
  for (int r = 0; r < ns; ++r) {
    const int i = s.idx[r];
    s.ytilde[r] = p.y(i, t) - p.y(i, base);
    s.X(r, 0) = 1.0;
    for (int j = 0; j < p.dx(); ++j) s.X(r, j + 1) = p.xval(i, base, j);
  }
  return s;
}

}  // namespace

FoldPlan make_folds(int n, int M, std::uint64_t seed) {
  if (M < 2) fail(Errc::BadConfig, "need at least 2 folds");
  if (M > n) fail(Errc::BadConfig, "more folds than units");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> key(n);
  for (int i = 0; i < n; ++i) key[i] = hash64(seed, static_cast<std::uint64_t>(i));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return key[a] != key[b] ? key[a] < key[b] : a < b;
  });
  FoldPlan plan;
  plan.M = M;
  plan.fold.resize(n);
  for (int r = 0; r < n; ++r) plan.fold[order[r]] = r % M;
  return plan;
}

CrossfitResult crossfit_gatt(const Panel& p, std::int64_t g, int t, int M,
                             std::uint64_t seed) {
  const Sample s = build_sample(p, g, t);
  const int ns = static_cast<int>(s.idx.size());
  const int q = static_cast<int>(s.X.cols());
  const FoldPlan plan = make_folds(p.n(), M, seed);

  // Each fold and each complement must contain both classes.
  std::vector<int> fg(M, 0), fc(M, 0);
  for (int r = 0; r < ns; ++r) {
    const int m = plan.fold[s.idx[r]];
    (s.is_g[r] ? fg[m] : fc[m])++;
  }
  for (int m = 0; m < M; ++m) {
    if (fg[m] == 0 || fc[m] == 0 || s.n_g - fg[m] == 0 ||
        (ns - s.n_g) - fc[m] == 0)
      fail(Errc::FoldCohortStarvation,
           "fold " + std::to_string(m) + " lacks cohort or control units");
  }

  // Fold-out nuisances evaluated at each sample unit.
  Eigen::VectorXd mhat(ns), ahat = Eigen::VectorXd::Zero(ns);
  for (int m = 0; m < M; ++m) {
    // Outcome regression on never-treated units outside fold m.
    std::vector<int> train_c, train_all;
    for (int r = 0; r < ns; ++r) {
      if (plan.fold[s.idx[r]] == m) continue;
      train_all.push_back(r);
      if (!s.is_g[r]) train_c.push_back(r);
    }
    Eigen::MatrixXd Xc(static_cast<Eigen::Index>(train_c.size()), q);
    Eigen::VectorXd yc(static_cast<Eigen::Index>(train_c.size()));
    for (std::size_t r = 0; r < train_c.size(); ++r) {
      Xc.row(static_cast<Eigen::Index>(r)) = s.X.row(train_c[r]);
      yc[static_cast<Eigen::Index>(r)] = s.ytilde[train_c[r]];
    }
    const Eigen::VectorXd mbeta = least_squares(Xc, yc).beta;

    // Cohort-membership logit on all comparison units outside fold m.
    Eigen::MatrixXd Xa(static_cast<Eigen::Index>(train_all.size()), q);
    std::vector<std::uint8_t> la(train_all.size());
    for (std::size_t r = 0; r < train_all.size(); ++r) {
      Xa.row(static_cast<Eigen::Index>(r)) = s.X.row(train_all[r]);
      la[r] = s.is_g[train_all[r]];
    }
    const LogitFit logit = fit_logit(Xa, la);

    // Evaluate on fold m; rescale the control odds within the fold so the
    // constant function is balanced exactly.
    double odds_sum = 0;
    int fold_g = 0;
    std::vector<int> fold_rows;
    for (int r = 0; r < ns; ++r) {
      if (plan.fold[s.idx[r]] != m) continue;
      fold_rows.push_back(r);
      mhat[r] = mbeta.dot(s.X.row(r));
      // Overlap must hold at every comparison unit; separation drives the
      // cohort-side fits to 1 first, so both arms are checked.
      const double pr = logit.prob(s.X.row(r).transpose());
      if (pr >= 1.0 - kOverlapEps)
        fail(Errc::OverlapFailure,
             "fitted propensity reaches " + std::to_string(pr) + " for a " +
                 (s.is_g[r] ? "cohort" : "never-treated") + " unit");
      if (s.is_g[r]) {
        ++fold_g;
        continue;
      }
      ahat[r] = pr / (1.0 - pr);
      odds_sum += ahat[r];
    }
    if (!(odds_sum > 0.0))
      fail(Errc::OverlapFailure, "control odds sum to zero in fold " + std::to_string(m));
    const double scale = static_cast<double>(fold_g) / odds_sum;
    for (int r : fold_rows)
      if (!s.is_g[r]) ahat[r] *= scale;
  }

  // Closed-form solution of sum psi(theta) = 0 and its influence.
  double num = 0;
  for (int r = 0; r < ns; ++r) {
    const double e = s.ytilde[r] - mhat[r];
    num += s.is_g[r] ? e : -ahat[r] * e;
  }
  CrossfitResult out;
  out.theta = num / static_cast<double>(s.n_g);
  out.n_comparison = ns;
  out.n_treated = s.n_g;
  out.folds = M;
  const double pg = static_cast<double>(s.n_g) / ns;
  double ssq = 0;
  out.influence = Eigen::VectorXd::Zero(p.n());
  for (int r = 0; r < ns; ++r) {
    const double e = s.ytilde[r] - mhat[r];
    const double psi = s.is_g[r] ? (e - out.theta) : -ahat[r] * e;
    ssq += psi * psi;
    out.influence[s.idx[r]] = (static_cast<double>(p.n()) / ns) * psi / pg;
  }
  out.se = std::sqrt(ssq / ns) / (std::sqrt(static_cast<double>(ns)) * pg);
  return out;
}

ScoreAudit dr_score_audit(const Panel& p, std::int64_t g, int t, double theta,
                          const std::function<double(const Eigen::VectorXd&)>& m,
                          const std::function<double(const Eigen::VectorXd&)>& alpha) {
  if (!m || !alpha) fail(Errc::BadConfig, "dr_score_audit requires both nuisances");
  const Sample s = build_sample(p, g, t);
  const int ns = static_cast<int>(s.idx.size());
  const int dxn = static_cast<int>(s.X.cols()) - 1;
  double acc = 0, acc2 = 0;
  for (int r = 0; r < ns; ++r) {
    const Eigen::VectorXd xr = s.X.row(r).tail(dxn);
    const double e = s.ytilde[r] - m(xr);
    const double psi = s.is_g[r] ? (e - theta) : -alpha(xr) * e;
    acc += psi;
    acc2 += psi * psi;
  }
  ScoreAudit out;
  out.n = ns;
  out.mean = acc / ns;
  out.se = std::sqrt((acc2 / ns - out.mean * out.mean) / ns);
  return out;
}

double RieszFit::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(beta.size());
  z[0] = 1.0;
  z.tail(beta.size() - 1) = x;
  const double pr = 1.0 / (1.0 + std::exp(-beta.dot(z)));
  return scale * pr / (1.0 - pr);
}

RieszFit riesz_representer(const Panel& p, std::int64_t g, int t) {
  const Sample s = build_sample(p, g, t);
  const int ns = static_cast<int>(s.idx.size());
  std::vector<std::uint8_t> lab(s.is_g.begin(), s.is_g.end());
  const LogitFit logit = fit_logit(s.X, lab);
  double odds_sum = 0;
  for (int r = 0; r < ns; ++r) {
    const double pr = logit.prob(s.X.row(r).transpose());
    if (pr >= 1.0 - kOverlapEps)
      fail(Errc::OverlapFailure, "fitted propensity reaches " + std::to_string(pr));
    if (s.is_g[r]) continue;
    odds_sum += pr / (1.0 - pr);
  }
  if (!(odds_sum > 0.0)) fail(Errc::OverlapFailure, "control odds sum to zero");
  RieszFit fit;
  fit.beta = logit.beta;
  fit.scale = static_cast<double>(s.n_g) / odds_sum;
  return fit;
}

OrthogonalityCheck orthogonality_check(
    const Panel& p, std::int64_t g, int t,
    const std::function<double(const Eigen::VectorXd&)>& h_m,
    const std::function<double(const Eigen::VectorXd&)>& h_alpha,
    const std::vector<double>& eps_grid, bool include_dual) {
  if (eps_grid.size() < 3)
    fail(Errc::BadConfig, "orthogonality_check needs >= 3 grid points");
  const Sample s = build_sample(p, g, t);
  const int ns = static_cast<int>(s.idx.size());
  const int dxn = static_cast<int>(s.X.cols()) - 1;

  // Whole-sample nuisances (population-analogue probe, no cross-fitting).
  std::vector<int> ctrl;
  for (int r = 0; r < ns; ++r)
    if (!s.is_g[r]) ctrl.push_back(r);
  Eigen::MatrixXd Xc(static_cast<Eigen::Index>(ctrl.size()), s.X.cols());
  Eigen::VectorXd yc(static_cast<Eigen::Index>(ctrl.size()));
  for (std::size_t r = 0; r < ctrl.size(); ++r) {
    Xc.row(static_cast<Eigen::Index>(r)) = s.X.row(ctrl[r]);
    yc[static_cast<Eigen::Index>(r)] = s.ytilde[ctrl[r]];
  }
  const Eigen::VectorXd mbeta = least_squares(Xc, yc).beta;
  const RieszFit riesz = riesz_representer(p, g, t);

  Eigen::VectorXd m0(ns), a0 = Eigen::VectorXd::Zero(ns), hm(ns), ha(ns);
  for (int r = 0; r < ns; ++r) {
    m0[r] = mbeta.dot(s.X.row(r));
    const Eigen::VectorXd xr = s.X.row(r).tail(dxn);
    if (!s.is_g[r]) a0[r] = riesz(xr);
    hm[r] = h_m ? h_m(xr) : 0.0;
    ha[r] = h_alpha ? h_alpha(xr) : 0.0;
  }

  // theta0 from the fitted score so the mean score vanishes at eps = 0.
  double num = 0;
  for (int r = 0; r < ns; ++r) {
    const double e = s.ytilde[r] - m0[r];
    num += s.is_g[r] ? e : (include_dual ? -a0[r] * e : 0.0);
  }
  const double theta0 = num / static_cast<double>(s.n_g);

  OrthogonalityCheck chk;
  chk.eps = eps_grid;
  chk.mean_score.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    double acc = 0;
    for (int r = 0; r < ns; ++r) {
      const double m = m0[r] + eps * hm[r];
      const double e = s.ytilde[r] - m;
      if (s.is_g[r]) {
        acc += e - theta0;
      } else if (include_dual) {
        acc -= (a0[r] + eps * ha[r]) * e;
      }
    }
    chk.mean_score.push_back(acc / ns);
  }

  // Quadratic fit of the mean score in eps.
  Eigen::MatrixXd Q(static_cast<Eigen::Index>(eps_grid.size()), 3);
  Eigen::VectorXd v(static_cast<Eigen::Index>(eps_grid.size()));
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    Q(static_cast<Eigen::Index>(i), 0) = 1.0;
    Q(static_cast<Eigen::Index>(i), 1) = eps_grid[i];
    Q(static_cast<Eigen::Index>(i), 2) = eps_grid[i] * eps_grid[i];
    v[static_cast<Eigen::Index>(i)] = chk.mean_score[i];
  }
  const Eigen::VectorXd bq = least_squares(Q, v).beta;
  chk.b0 = bq[0];
  chk.b1 = bq[1];
  chk.b2 = bq[2];
  chk.slope_rel = std::abs(bq[1]) / std::max(1.0, std::abs(bq[2]));
  return chk;
}

}  // namespace stagger
