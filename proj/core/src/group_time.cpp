// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/group_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "stagger/errors.hpp"
#include "stagger/regression.hpp"

namespace stagger {

namespace {

constexpr double kOverlapEps = 1e-6;

bool in_control(const Panel& p, int i, std::int64_t g, int through_t, ControlKind c) {
  if (c == ControlKind::NeverTreated) return p.never_treated(i);
  // Not-yet-treated: untreated through the latest period the contrast uses.
  // kNever compares greater than any period, so never-treated units qualify.
  return p.cohort(i) > through_t && p.cohort(i) != g;
}

}  // namespace

GattCell gatt_cell(const Panel& p, std::int64_t g, int t, ControlKind control,
                   bool propensity_reweight) {
  const int base = static_cast<int>(g - 1);
  if (g == kNever || p.cohort_count(g) == 0)
    fail(Errc::BadConfig, "gatt_cell: no units adopt at " + std::to_string(g));
  if (base < 1 || base > p.T())
    fail(Errc::MissingBasePeriod,
         "base period " + std::to_string(base) + " outside the panel window");
  if (t < 1 || t > p.T() || t == base)
    fail(Errc::BadConfig, "gatt_cell: period t=" + std::to_string(t) + " invalid");
  const int through = std::max(t, base);

  GattCell cell;
  cell.g = g;
  cell.t = t;
  cell.k = static_cast<int>(t - g);
  cell.control = control;
  cell.propensity = propensity_reweight;
  const int n = p.n();
  cell.influence = Eigen::VectorXd::Zero(n);

  if (!propensity_reweight) {
    // Difference-in-differences of four cell means; each mean uses the units
    // observed in that cell.
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    int n1 = 0, n2 = 0, n3 = 0, n4 = 0;
    for (int i = 0; i < n; ++i) {
      if (p.cohort(i) == g) {
        if (p.observed(i, t)) {
          s1 += p.y(i, t);
          ++n1;
        }
        if (p.observed(i, base)) {
          s2 += p.y(i, base);
          ++n2;
        }
      } else if (in_control(p, i, g, through, control)) {
        if (p.observed(i, t)) {
          s3 += p.y(i, t);
          ++n3;
        }
        if (p.observed(i, base)) {
          s4 += p.y(i, base);
          ++n4;
        }
      }
    }
    if (n1 == 0)
      fail(Errc::MissingCell, "no cohort-" + std::to_string(g) +
                                  " units observed at t=" + std::to_string(t));
    if (n2 == 0)
      fail(Errc::MissingBasePeriod, "no cohort-" + std::to_string(g) +
                                        " units observed at base " +
                                        std::to_string(base));
    if (n3 == 0 || n4 == 0)
      fail(Errc::EmptyControlSet,
           std::string("no ") + control_name(control) + " units observed at both " +
               "t=" + std::to_string(t) + " and base " + std::to_string(base));
    const double m1 = s1 / n1, m2 = s2 / n2, m3 = s3 / n3, m4 = s4 / n4;
    cell.estimate = (m1 - m2) - (m3 - m4);
    cell.n_treated = n1;
    cell.n_control = n3;
    for (int i = 0; i < n; ++i) {
      double phi = 0;
      if (p.cohort(i) == g) {
        if (p.observed(i, t)) phi += (p.y(i, t) - m1) * (static_cast<double>(n) / n1);
        if (p.observed(i, base))
          phi -= (p.y(i, base) - m2) * (static_cast<double>(n) / n2);
      } else if (in_control(p, i, g, through, control)) {
        if (p.observed(i, t)) phi -= (p.y(i, t) - m3) * (static_cast<double>(n) / n3);
        if (p.observed(i, base))
          phi += (p.y(i, base) - m4) * (static_cast<double>(n) / n4);
      }
      cell.influence[i] = phi;
    }
    cell.se = std::sqrt(cell.influence.squaredNorm()) / n;
    return cell;
  }

  // Propensity-reweighted variant on the paired sample (both periods
  // observed): Hajek mean of control long differences weighted by fitted
  // cohort odds on base-period covariates.
  std::vector<int> gl, cl;  // panel indices of treated / control sample units
  for (int i = 0; i < n; ++i) {
    if (!(p.observed(i, t) && p.observed(i, base))) continue;
    if (p.cohort(i) == g)
      gl.push_back(i);
    else if (in_control(p, i, g, through, control))
      cl.push_back(i);
  }
  if (gl.empty())
    fail(Errc::MissingCell, "no cohort-" + std::to_string(g) +
                                " units observed at both periods");
  if (cl.empty())
    fail(Errc::EmptyControlSet,
         std::string("no ") + control_name(control) + " units observed at both periods");

  const int dx = p.dx();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(gl.size() + cl.size()), dx + 1);
  std::vector<std::uint8_t> lab(gl.size() + cl.size());
  for (std::size_t r = 0; r < gl.size() + cl.size(); ++r) {
    const int i = r < gl.size() ? gl[r] : cl[r - gl.size()];
    X(static_cast<Eigen::Index>(r), 0) = 1.0;
    for (int j = 0; j < dx; ++j)
      X(static_cast<Eigen::Index>(r), j + 1) = p.xval(i, base, j);
    lab[r] = r < gl.size() ? 1 : 0;
  }
  const LogitFit logit = fit_logit(X, lab);

  double sg = 0;
  for (int i : gl) sg += p.y(i, t) - p.y(i, base);
  const double mg = sg / static_cast<double>(gl.size());

  // Overlap must hold at every comparison unit; separation drives the
  // cohort-side fits to 1 first, so both arms are checked.
  for (int i : gl) {
    Eigen::VectorXd xi(dx + 1);
    xi[0] = 1.0;
    for (int j = 0; j < dx; ++j) xi[j + 1] = p.xval(i, base, j);
    const double pr = logit.prob(xi);
    if (pr >= 1.0 - kOverlapEps)
      fail(Errc::OverlapFailure,
           "fitted propensity reaches " + std::to_string(pr) + " for a cohort unit");
  }
  std::vector<double> alpha(cl.size());
  double asum = 0, awsum = 0;
  for (std::size_t r = 0; r < cl.size(); ++r) {
    const int i = cl[r];
    Eigen::VectorXd xi(dx + 1);
    xi[0] = 1.0;
    for (int j = 0; j < dx; ++j) xi[j + 1] = p.xval(i, base, j);
    const double pr = logit.prob(xi);
    if (pr >= 1.0 - kOverlapEps)
      fail(Errc::OverlapFailure,
           "fitted propensity reaches " + std::to_string(pr) + " for a control unit");
    alpha[r] = pr / (1.0 - pr);
    asum += alpha[r];
    awsum += alpha[r] * (p.y(i, t) - p.y(i, base));
  }
  if (!(asum > 0.0)) fail(Errc::OverlapFailure, "control odds sum to zero");
  const double mc = awsum / asum;
  cell.estimate = mg - mc;
  cell.n_treated = static_cast<int>(gl.size());
  cell.n_control = static_cast<int>(cl.size());
  for (int i : gl)
    cell.influence[i] =
        ((p.y(i, t) - p.y(i, base)) - mg) * (static_cast<double>(n) / gl.size());
  for (std::size_t r = 0; r < cl.size(); ++r) {
    const int i = cl[r];
    cell.influence[i] =
        -alpha[r] * ((p.y(i, t) - p.y(i, base)) - mc) * (static_cast<double>(n) / asum);
  }
  cell.se = std::sqrt(cell.influence.squaredNorm()) / n;
  return cell;
}

GattTable gatt_table(const Panel& p, ControlKind control, bool propensity_reweight) {
  GattTable tab;
  tab.control = control;
  for (std::int64_t g : p.adoption_times()) {
    if (g - 1 < 1) {
      tab.warnings.push_back("cohort " + std::to_string(g) +
                             " has no base period inside the window; skipped");
      continue;
    }
    for (int t = static_cast<int>(g); t <= p.T(); ++t) {
      try {
        tab.cells.push_back(gatt_cell(p, g, t, control, propensity_reweight));
      } catch (const Error& e) {
        if (e.code() == Errc::EmptyControlSet || e.code() == Errc::MissingCell ||
            e.code() == Errc::MissingBasePeriod) {
          tab.warnings.push_back("cell (g=" + std::to_string(g) +
                                 ", t=" + std::to_string(t) + ") skipped: " + e.message());
        } else {
          throw;
        }
      }
    }
  }
  return tab;
}

std::vector<GattCell> placebo_cells(const Panel& p, ControlKind control, int max_lead,
                                    bool propensity_reweight) {
  if (max_lead < 1) fail(Errc::BadConfig, "placebo_cells: max_lead must be >= 1");
  std::vector<GattCell> out;
  for (std::int64_t g : p.adoption_times()) {
    for (int lead = max_lead; lead >= 1; --lead) {
      const int t = static_cast<int>(g) - 1 - lead;  // event time -1-lead
      if (t < 1) continue;
      try {
        out.push_back(gatt_cell(p, g, t, control, propensity_reweight));
      } catch (const Error& e) {
        if (e.code() != Errc::EmptyControlSet && e.code() != Errc::MissingCell &&
            e.code() != Errc::MissingBasePeriod)
          throw;
      }
    }
  }
  return out;
}

namespace {
double scheme_weight(const Panel& p, const Scheme& s, std::int64_t g) {
  switch (s.kind) {
    case Scheme::SampleShare:
      return static_cast<double>(p.cohort_count(g));
    case Scheme::PopulationShare: {
      const auto it = s.population_shares.find(g);
      if (it == s.population_shares.end())
        fail(Errc::BadConfig,
             "population share missing for cohort " + std::to_string(g));
      if (!(it->second >= 0.0))
        fail(Errc::BadConfig, "population shares must be nonnegative");
      return it->second;
    }
    case Scheme::Exposure: {
      double w = 0;
      for (int i = 0; i < p.n(); ++i)
        if (p.cohort(i) == g) w += p.exposure(i);
      return w;
    }
  }
  return 0;
}
}  // namespace

AggregateResult aggregate_event(const std::vector<GattCell>& cells, const Panel& p,
                                const Scheme& scheme) {
  AggregateResult out;
  out.scheme = scheme;
  std::map<int, std::vector<const GattCell*>> by_k;
  for (const auto& c : cells) by_k[c.k].push_back(&c);

  for (auto& [k, group] : by_k) {
    // Theoretical cohort set at this horizon: adoption times with the
    // contrast period inside the window and a usable base period.
    std::set<std::int64_t> theory;
    for (std::int64_t g : p.adoption_times()) {
      const std::int64_t tt = g + k;
      if (tt >= 1 && tt <= p.T() && g - 1 >= 1 && tt != g - 1) theory.insert(g);
    }
    std::set<std::int64_t> avail;
    for (const auto* c : group) avail.insert(c->g);

    AggregateRow row;
    row.k = k;
    row.renormalized = avail != theory;
    if (row.renormalized)
      out.warnings.push_back(
          "horizon " + std::to_string(k) + ": weights renormalized over " +
          std::to_string(avail.size()) + " of " + std::to_string(theory.size()) +
          " cohorts");

    double wsum = 0;
    std::map<std::int64_t, double> w;
    for (const auto* c : group) {
      const double wg = scheme_weight(p, scheme, c->g);
      w[c->g] = wg;
      wsum += wg;
    }
    if (!(wsum > 0.0))
      fail(Errc::BadConfig,
           "aggregation weights sum to zero at horizon " + std::to_string(k));
    row.influence = Eigen::VectorXd::Zero(p.n());
    for (const auto* c : group) {
      const double omega = w[c->g] / wsum;
      row.omegas.emplace_back(c->g, omega);
      row.estimate += omega * c->estimate;
      row.influence += omega * c->influence;
    }
    row.se = std::sqrt(row.influence.squaredNorm()) / p.n();
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<CumulativeRow> cumulative_effects(const AggregateResult& agg, int n_units) {
  std::map<int, const AggregateRow*> rows;
  for (const auto& r : agg.rows)
    if (r.k >= 0) rows[r.k] = &r;
  if (rows.empty() || rows.begin()->first != 0)
    fail(Errc::GapInPath, "cumulative effects need horizons starting at 0");
  std::vector<CumulativeRow> out;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_units);
  double total = 0;
  int expect = 0;
  for (const auto& [k, r] : rows) {
    if (k != expect)
      fail(Errc::GapInPath, "missing horizon " + std::to_string(expect) +
                                " in cumulative path");
    ++expect;
    total += r->estimate;
    acc += r->influence;
    out.push_back({k, total, std::sqrt(acc.squaredNorm()) / n_units});
  }
  return out;
}

ImputationResult imputation_event_study(const Panel& p) {
  const int n = p.n(), T = p.T(), dx = p.dx();
  // Untreated observed cells (pre cells of treated units plus all observed
  // never-treated cells) form the estimation sample.
  std::vector<int> ui, ut;
  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T; ++t)
      if (p.observed(i, t) && !p.treated(i, t)) {
        ui.push_back(i);
        ut.push_back(t - 1);
      }
  if (ui.empty()) fail(Errc::DisconnectedUntreatedSample, "no untreated cells");

  // Connectivity of the unit/period bipartite graph over untreated cells:
  // every unit and period must sit in one component or fitted values at
  // treated cells are not identified.
  std::vector<int> parent(n + T);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t r = 0; r < ui.size(); ++r)
    parent[find(ui[r])] = find(n + ut[r]);
  const int root = find(ui[0]);
  for (int i = 0; i < n; ++i)
    if (find(i) != root)
      fail(Errc::DisconnectedUntreatedSample,
           "unit " + std::to_string(p.unit_id(i)) +
               " is not connected to the untreated sample");
  for (int t = 0; t < T; ++t)
    if (find(n + t) != root)
      fail(Errc::DisconnectedUntreatedSample,
           "period " + std::to_string(p.time_origin() + t) +
               " is not connected to the untreated sample");

  // Covariate coefficients from the within-transformed untreated sample.
  Eigen::VectorXd cvec = Eigen::VectorXd::Zero(dx);
  const Eigen::Index R = static_cast<Eigen::Index>(ui.size());
  if (dx > 0) {
    Eigen::MatrixXd V(R, dx + 1);
    for (Eigen::Index r = 0; r < R; ++r) {
      V(r, 0) = p.y(ui[r], ut[r] + 1);
      for (int j = 0; j < dx; ++j) V(r, j + 1) = p.xval(ui[r], ut[r] + 1, j);
    }
    V = alternating_demean(std::move(V), ui, ut, n, T);
    const LeastSquares ls = least_squares(V.rightCols(dx), V.col(0));
    cvec = ls.beta;
  }

  // Alternating means for the additive unit/period effects of y - x'c.
  std::vector<double> resid(ui.size());
  for (std::size_t r = 0; r < ui.size(); ++r) {
    double v = p.y(ui[r], ut[r] + 1);
    for (int j = 0; j < dx; ++j) v -= cvec[j] * p.xval(ui[r], ut[r] + 1, j);
    resid[r] = v;
  }
  std::vector<double> a(n, 0.0), b(T, 0.0);
  std::vector<int> cu(n, 0), ct(T, 0);
  for (std::size_t r = 0; r < ui.size(); ++r) {
    ++cu[ui[r]];
    ++ct[ut[r]];
  }
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0;
    std::vector<double> sa(n, 0.0);
    for (std::size_t r = 0; r < ui.size(); ++r) sa[ui[r]] += resid[r] - b[ut[r]];
    for (int i = 0; i < n; ++i)
      if (cu[i]) {
        const double v = sa[i] / cu[i];
        change = std::max(change, std::abs(v - a[i]));
        a[i] = v;
      }
    std::vector<double> sb(T, 0.0);
    for (std::size_t r = 0; r < ui.size(); ++r) sb[ut[r]] += resid[r] - a[ui[r]];
    for (int t = 0; t < T; ++t)
      if (ct[t]) {
        const double v = sb[t] / ct[t];
        change = std::max(change, std::abs(v - b[t]));
        b[t] = v;
      }
    if (change < 1e-12) break;
    if (sweep == 9999)
      fail(Errc::NoConvergence, "imputation fixed-effect fit did not converge");
  }

  // Average imputed residuals of treated observed cells by event time.
  std::map<int, std::pair<double, int>> acc;
  for (int i = 0; i < n; ++i) {
    if (p.never_treated(i)) continue;
    for (int t = 1; t <= T; ++t) {
      if (!p.observed(i, t) || !p.treated(i, t)) continue;
      double fit = a[i] + b[t - 1];
      for (int j = 0; j < dx; ++j) fit += cvec[j] * p.xval(i, t, j);
      const int k = static_cast<int>(t - p.cohort(i));
      auto& slot = acc[k];
      slot.first += p.y(i, t) - fit;
      ++slot.second;
    }
  }
  ImputationResult out;
  for (const auto& [k, s] : acc)
    out.rows.push_back({k, s.first / s.second, s.second});
  return out;
}

}  // namespace stagger
