// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_GROUP_TIME_HPP
#define STAGGER_GROUP_TIME_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stagger/panel.hpp"

namespace stagger {

enum class ControlKind { NeverTreated, NotYetTreated };
inline const char* control_name(ControlKind c) {
  return c == ControlKind::NeverTreated ? "never-treated" : "not-yet-treated";
}

// One cohort-period contrast: the difference-in-differences of cell means
// between cohort g and its control set, from base period g-1 to period t.
// influence holds per-unit contributions phi_i (full-panel indexing, mean 0)
// with Var(estimate) = (1/n^2) sum phi_i^2, so cells can be pooled by adding
// influence vectors.
struct GattCell {
  std::int64_t g = 0;
  int t = 0;
  int k = 0;  // t - g
  double estimate = 0, se = 0;
  int n_treated = 0, n_control = 0;
  ControlKind control = ControlKind::NeverTreated;
  bool propensity = false;
  Eigen::VectorXd influence;
};

// Estimates a single cell; t may be any period other than the base g-1
// (t < g-1 gives a placebo contrast). With propensity_reweight the control
// mean is Hajek-reweighted by fitted cohort odds on base-period covariates,
// the sample restricted to units observed at both periods, and the standard
// error treats the weights as known.
GattCell gatt_cell(const Panel& p, std::int64_t g, int t, ControlKind control,
                   bool propensity_reweight = false);

struct GattTable {
  std::vector<GattCell> cells;   // t >= g only, ordered by (g, t)
  ControlKind control = ControlKind::NeverTreated;
  std::vector<std::string> warnings;  // cells skipped and why
};
// All estimable post cells (t from g to T). Cells whose control set is empty
// or whose base period is unusable are skipped with a warning.
GattTable gatt_table(const Panel& p, ControlKind control, bool propensity_reweight = false);

// Placebo cells t in [g-1-max_lead, g-2], i.e. event times -1-max_lead..-2.
std::vector<GattCell> placebo_cells(const Panel& p, ControlKind control, int max_lead,
                                    bool propensity_reweight = false);

// Aggregation scheme across cohorts at a shared event time.
struct Scheme {
  enum Kind { SampleShare, PopulationShare, Exposure } kind = SampleShare;
  std::map<std::int64_t, double> population_shares;  // required for PopulationShare
};
inline const char* scheme_name(Scheme::Kind k) {
  switch (k) {
    case Scheme::SampleShare: return "sample-share";
    case Scheme::PopulationShare: return "population-share";
    case Scheme::Exposure: return "exposure";
  }
  return "?";
}

struct AggregateRow {
  int k = 0;
  double estimate = 0, se = 0;
  std::vector<std::pair<std::int64_t, double>> omegas;  // cohort weights used
  bool renormalized = false;  // some theoretical cohorts were unavailable
  Eigen::VectorXd influence;
};
struct AggregateResult {
  std::vector<AggregateRow> rows;  // ascending k
  Scheme scheme;
  std::vector<std::string> warnings;
};
// Convex cross-cohort aggregation of cell estimates by event time. Weights
// are renormalized over available cohorts when cells are missing, with a
// warning and the renormalized flag set.
AggregateResult aggregate_event(const std::vector<GattCell>& cells, const Panel& p,
                                const Scheme& scheme);

// Prefix sums over event times 0..k with influence-accumulated standard
// errors. The aggregate must cover horizons 0,1,2,... contiguously.
struct CumulativeRow {
  int k = 0;
  double estimate = 0, se = 0;
};
std::vector<CumulativeRow> cumulative_effects(const AggregateResult& agg, int n_units);

// Imputation comparator: fits unit and period effects (plus a linear term in
// the covariates when present) on untreated observed cells, then averages the
// residuals of treated observed cells by event time. No standard errors are
// reported (se = NaN by convention).
struct ImputationRow {
  int k = 0;
  double estimate = 0;
  int n_cells = 0;
};
struct ImputationResult {
  std::vector<ImputationRow> rows;  // ascending k over treated horizons
};
ImputationResult imputation_event_study(const Panel& p);

}  // namespace stagger

#endif  // STAGGER_GROUP_TIME_HPP
