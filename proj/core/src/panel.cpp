// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_map>

#include "stagger/errors.hpp"

namespace stagger {

int Panel::cohort_count(std::int64_t g) const {
  int c = 0;
  for (auto v : cohort_)
    if (v == g) ++c;
  return c;
}

Panel::DesignSummary Panel::design_summary() const {
  DesignSummary s;
  s.n = n_;
  s.T = T_;
  for (auto g : cohort_) ++s.cohort_sizes[g];
  for (auto& [g, c] : s.cohort_sizes)
    s.cohort_shares[g] = static_cast<double>(c) / static_cast<double>(n_);
  s.treated_share.assign(T_, 0.0);
  for (int t = 1; t <= T_; ++t) {
    int c = 0;
    for (int i = 0; i < n_; ++i)
      if (treated(i, t)) ++c;
    s.treated_share[t - 1] = static_cast<double>(c) / static_cast<double>(n_);
  }
  return s;
}

Panel build_panel(const PanelInput& in, const PanelOptions& opt) {
  const std::size_t R = in.unit.size();
  if (R == 0) fail(Errc::EmptyPanel, "panel has no rows");
  if (in.time.size() != R || in.outcome.size() != R || in.cohort.size() != R)
    fail(Errc::BadConfig, "panel input columns have inconsistent lengths");
  for (const auto& col : in.x)
    if (col.size() != R) fail(Errc::BadConfig, "covariate column length mismatch");
  if (!in.exposure.empty() && in.exposure.size() != R)
    fail(Errc::BadConfig, "exposure column length mismatch");
  if (!in.observed.empty() && in.observed.size() != R)
    fail(Errc::BadConfig, "observed column length mismatch");
  for (auto v : in.observed)
    if (v != 0 && v != 1) fail(Errc::BadConfig, "observed mask entries must be 0 or 1");

  // Distinct units (ascending id) and the time grid.
  std::set<std::int64_t> unit_set(in.unit.begin(), in.unit.end());
  std::set<std::int64_t> time_set(in.time.begin(), in.time.end());
  const std::int64_t t_min = *time_set.begin();
  const std::int64_t t_max = *time_set.rbegin();
  const std::int64_t span = t_max - t_min + 1;
  if (static_cast<std::int64_t>(time_set.size()) != span)
    fail(Errc::MixedFrequency,
         "time values are not a contiguous integer grid (observed " +
             std::to_string(time_set.size()) + " distinct times spanning " +
             std::to_string(span) + ")");

  const int n_all = static_cast<int>(unit_set.size());
  const int T = static_cast<int>(span);
  std::unordered_map<std::int64_t, int> unit_index;
  std::vector<std::int64_t> ids(unit_set.begin(), unit_set.end());
  unit_index.reserve(ids.size());
  for (int i = 0; i < n_all; ++i) unit_index[ids[i]] = i;

  // Place rows on the n x T grid, detecting duplicates and gaps.
  const int dx = static_cast<int>(in.x.size());
  Eigen::MatrixXd y(n_all, T);
  std::vector<Eigen::MatrixXd> x(dx, Eigen::MatrixXd(n_all, T));
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> obs(n_all, T);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> seen(n_all, T);
  seen.setZero();
  std::vector<std::int64_t> cohort(n_all, 0);
  std::vector<std::uint8_t> cohort_set(n_all, 0);
  std::vector<double> exposure(n_all, 1.0);
  std::vector<std::uint8_t> exposure_set(n_all, 0);

  for (std::size_t r = 0; r < R; ++r) {
    const int i = unit_index[in.unit[r]];
    const int tcol = static_cast<int>(in.time[r] - t_min);
    if (seen(i, tcol))
      fail(Errc::DuplicateCell, "duplicate row for unit " + std::to_string(in.unit[r]) +
                                    " at time " + std::to_string(in.time[r]));
    seen(i, tcol) = 1;
    const bool is_obs = in.observed.empty() ? true : in.observed[r] != 0;
    obs(i, tcol) = is_obs ? 1 : 0;
    y(i, tcol) = in.outcome[r];
    if (is_obs && !std::isfinite(in.outcome[r]))
      fail(Errc::BadConfig, "non-finite outcome for observed cell (unit " +
                                std::to_string(in.unit[r]) + ", time " +
                                std::to_string(in.time[r]) + ")");
    for (int j = 0; j < dx; ++j) {
      x[j](i, tcol) = in.x[j][r];
      if (is_obs && !std::isfinite(in.x[j][r]))
        fail(Errc::BadConfig, "non-finite covariate for observed cell");
    }
    if (cohort_set[i]) {
      if (cohort[i] != in.cohort[r])
        fail(Errc::BadConfig, "cohort varies within unit " + std::to_string(in.unit[r]));
    } else {
      cohort[i] = in.cohort[r];
      cohort_set[i] = 1;
    }
    if (!in.exposure.empty()) {
      if (!exposure_set[i]) {
        exposure[i] = in.exposure[r];
        exposure_set[i] = 1;
        if (!std::isfinite(in.exposure[r]) || in.exposure[r] < 0.0)
          fail(Errc::BadConfig, "exposure must be finite and nonnegative");
      }
    }
  }
  if (static_cast<std::int64_t>(R) != static_cast<std::int64_t>(n_all) * T) {
    // Identify one example of a missing combination for the message.
    for (int i = 0; i < n_all; ++i)
      for (int t = 0; t < T; ++t)
        if (!seen(i, t))
          fail(Errc::UnbalancedPanel,
               "missing row for unit " + std::to_string(ids[i]) + " at time " +
                   std::to_string(t_min + t) +
                   " (use the observed column for attrition, not missing rows)");
    fail(Errc::UnbalancedPanel, "row count does not match units x times");
  }

  // Normalize times to 1..T; shift finite cohorts by the same offset.
  const std::int64_t origin = t_min;
  for (int i = 0; i < n_all; ++i)
    if (cohort[i] != kNever) cohort[i] = cohort[i] - origin + 1;

  // Support trimming: treated units need k_pre observed pre periods and
  // k_post observed post periods inside the window.
  std::vector<int> keep;
  std::vector<std::int64_t> trimmed;
  keep.reserve(n_all);
  for (int i = 0; i < n_all; ++i) {
    if (!opt.trim || cohort[i] == kNever) {
      keep.push_back(i);
      continue;
    }
    int pre = 0, post = 0;
    for (int t = 1; t <= T; ++t) {
      if (!obs(i, t - 1)) continue;
      if (t < cohort[i])
        ++pre;
      else
        ++post;
    }
    if (pre >= opt.k_pre && post >= opt.k_post)
      keep.push_back(i);
    else
      trimmed.push_back(ids[i]);
  }
  if (keep.empty()) fail(Errc::EmptyPanel, "all units removed by support trimming");

  Panel p;
  p.n_ = static_cast<int>(keep.size());
  p.T_ = T;
  p.time_origin_ = origin;
  p.trimmed_units_ = std::move(trimmed);
  p.unit_ids_.resize(p.n_);
  p.cohort_.resize(p.n_);
  p.y_.resize(p.n_, T);
  p.x_.assign(dx, Eigen::MatrixXd(p.n_, T));
  p.observed_.resize(p.n_, T);
  if (!in.exposure.empty()) p.exposure_.resize(p.n_);
  for (int r = 0; r < p.n_; ++r) {
    const int i = keep[r];
    p.unit_ids_[r] = ids[i];
    p.cohort_[r] = cohort[i];
    p.y_.row(r) = y.row(i);
    for (int j = 0; j < dx; ++j) p.x_[j].row(r) = x[j].row(i);
    p.observed_.row(r) = obs.row(i);
    if (!in.exposure.empty()) p.exposure_[r] = exposure[i];
  }
  p.fully_observed_ = (p.observed_.array() != 0).all();
  std::set<std::int64_t> gs;
  p.n_never_ = 0;
  for (auto g : p.cohort_) {
    if (g == kNever)
      ++p.n_never_;
    else
      gs.insert(g);
  }
  p.adoption_times_.assign(gs.begin(), gs.end());
  return p;
}

std::vector<std::int64_t> cohort_from_paths(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>& paths) {
  const int n = static_cast<int>(paths.rows());
  const int T = static_cast<int>(paths.cols());
  if (n == 0 || T == 0) fail(Errc::EmptyPanel, "empty treatment path matrix");
  std::vector<std::int64_t> cohort(n, kNever);
  for (int i = 0; i < n; ++i) {
    int first = -1;
    for (int t = 0; t < T; ++t) {
      const double v = paths(i, t);
      if (v != 0.0 && v != 1.0)
        fail(Errc::BadConfig, "treatment paths must be 0/1");
      if (v == 1.0 && first < 0) first = t;
      if (v == 0.0 && first >= 0)
        fail(Errc::NonMonotoneTreatment,
             "unit " + std::to_string(i) + " switches treatment off at period " +
                 std::to_string(t + 1));
    }
    if (first >= 0) cohort[i] = first + 1;
  }
  return cohort;
}

}  // namespace stagger
