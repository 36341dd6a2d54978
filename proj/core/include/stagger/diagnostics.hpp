// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_DIAGNOSTICS_HPP
#define STAGGER_DIAGNOSTICS_HPP

#include <vector>

#include "stagger/twfe.hpp"

namespace stagger {

// Per-horizon contamination summary of an implicit-weight decomposition.
//   S = sum of weights            (1 for identified post horizons)
//   N = total negative mass       sum of |w| over w < 0
//   C = cross-horizon mass        sum of |w| over cells with k' != k
//   A = total absolute mass       satisfies A = S + 2N
// identified marks horizons whose dummy was retained AND that are post
// horizons (k >= 0); pre-horizon coefficients estimate placebo contrasts
// whose loadings on treatment effects sum to zero rather than one.
struct DiagnosticsRow {
  int k = 0;
  double N = 0, C = 0, A = 0, S = 0;
  bool identified = false;
};
struct DiagnosticsReport {
  std::vector<DiagnosticsRow> rows;  // one per dummy horizon, ascending
};
DiagnosticsReport weight_diagnostics(const TwfeWeights& w);

// Association between realized distortions (beta_k minus the declared
// aggregand truth) and the diagnostics across designs or replications.
// Pearson correlations use a zero-variance convention: a degenerate input
// (zero variance on either side) yields correlation 0 and a degenerate flag.
// The joint fit regresses dist on (1, N, C) with the usual drop-and-report
// rank handling; dropped coefficients surface as NaN.
struct DistortionSummary {
  double corr_N = 0, corr_C = 0;
  bool degenerate_N = false, degenerate_C = false;
  double b0 = 0, bN = 0, bC = 0;
};
DistortionSummary distortion_summary(const std::vector<double>& dist,
                                     const std::vector<double>& N,
                                     const std::vector<double>& C);

}  // namespace stagger

#endif  // STAGGER_DIAGNOSTICS_HPP
