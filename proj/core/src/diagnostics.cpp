// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "stagger/errors.hpp"
#include "stagger/regression.hpp"

namespace stagger {

DiagnosticsReport weight_diagnostics(const TwfeWeights& w) {
  DiagnosticsReport rep;
  rep.rows.reserve(w.per_target.size());
  for (const auto& wd : w.per_target) {
    DiagnosticsRow row;
    row.k = wd.target_k;
    row.identified = wd.retained && wd.target_k >= 0;
    if (wd.retained) {
      for (const auto& cw : wd.weights) {
        row.S += cw.w;
        row.A += std::abs(cw.w);
        if (cw.w < 0) row.N += -cw.w;
        if (cw.kprime != wd.target_k) row.C += std::abs(cw.w);
      }
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.N = row.C = row.A = row.S = nan;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {
// Pearson correlation with the zero-variance convention.
double safe_corr(const std::vector<double>& a, const std::vector<double>& b,
                 bool* degenerate) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    *degenerate = true;
    return 0.0;
  }
  *degenerate = false;
  return sab / std::sqrt(saa * sbb);
}
}  // namespace

DistortionSummary distortion_summary(const std::vector<double>& dist,
                                     const std::vector<double>& N,
                                     const std::vector<double>& C) {
  const std::size_t n = dist.size();
  if (N.size() != n || C.size() != n)
    fail(Errc::BadConfig, "distortion_summary: input length mismatch");
  if (n < 2) fail(Errc::BadConfig, "distortion_summary: need at least 2 points");

  DistortionSummary s;
  s.corr_N = safe_corr(dist, N, &s.degenerate_N);
  s.corr_C = safe_corr(dist, C, &s.degenerate_C);

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = N[i];
    X(static_cast<Eigen::Index>(i), 2) = C[i];
    y[static_cast<Eigen::Index>(i)] = dist[i];
  }
  const LeastSquares ls = least_squares(X, y);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.b0 = ls.beta[0];
  s.bN = ls.beta[1];
  s.bC = ls.beta[2];
  for (int dcol : ls.dropped) {
    if (dcol == 0) s.b0 = nan;
    if (dcol == 1) s.bN = nan;
    if (dcol == 2) s.bC = nan;
  }
  return s;
}

}  // namespace stagger
