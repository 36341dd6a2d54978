// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_PANEL_HPP
#define STAGGER_PANEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace stagger {

// Sentinel adoption time for never-treated units. Comparisons of the form
// "cohort <= t" and "cohort > t" then work without special cases.
inline constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

// Columnar raw input for build_panel: one entry per (unit, time) row.
struct PanelInput {
  std::vector<std::int64_t> unit;
  std::vector<std::int64_t> time;
  std::vector<double> outcome;
  std::vector<std::int64_t> cohort;        // adoption time, kNever if never treated
  std::vector<std::vector<double>> x;      // x[j][row], j = 0..dx-1; may be empty
  std::vector<double> exposure;            // per row; empty if absent
  std::vector<std::uint8_t> observed;      // per row, 0/1; empty means all observed
};

struct PanelOptions {
  // Treated units need at least k_pre observed pre-adoption periods and k_post
  // observed post-adoption periods; units failing the requirement are dropped
  // (never-treated units are exempt). Set trim = false to keep everything.
  int k_pre = 1;
  int k_post = 1;
  bool trim = true;
};

// Validated balanced panel. Times are normalized to 1..T internally; the
// original origin is retained so serialization round-trips. Attrition is
// carried by the observed mask, never by missing rows.
class Panel {
 public:
  int n() const { return n_; }
  int T() const { return T_; }
  int dx() const { return static_cast<int>(x_.size()); }
  std::int64_t time_origin() const { return time_origin_; }

  std::int64_t unit_id(int i) const { return unit_ids_[i]; }
  // Internal adoption time in 1..T (possibly outside that range for units
  // adopting before/after the window), or kNever.
  std::int64_t cohort(int i) const { return cohort_[i]; }
  bool never_treated(int i) const { return cohort_[i] == kNever; }
  bool treated(int i, int t) const {
    return cohort_[i] != kNever && cohort_[i] <= t;
  }

  double y(int i, int t) const { return y_(i, t - 1); }
  double xval(int i, int t, int j) const { return x_[j](i, t - 1); }
  bool observed(int i, int t) const { return observed_(i, t - 1) != 0; }
  double exposure(int i) const { return exposure_.empty() ? 1.0 : exposure_[i]; }
  bool has_exposure() const { return !exposure_.empty(); }
  bool fully_observed() const { return fully_observed_; }

  // Distinct treated adoption times present, ascending (kNever excluded).
  const std::vector<std::int64_t>& adoption_times() const { return adoption_times_; }
  bool has_never_treated() const { return n_never_ > 0; }
  int never_count() const { return n_never_; }
  int cohort_count(std::int64_t g) const;

  // Units whose rows were removed by support trimming (original ids).
  const std::vector<std::int64_t>& trimmed_units() const { return trimmed_units_; }

  struct DesignSummary {
    int n = 0;
    int T = 0;
    std::map<std::int64_t, int> cohort_sizes;   // includes kNever if present
    std::map<std::int64_t, double> cohort_shares;
    std::vector<double> treated_share;          // by period t = 1..T
  };
  DesignSummary design_summary() const;

  friend Panel build_panel(const PanelInput& in, const PanelOptions& opt);

 private:
  int n_ = 0;
  int T_ = 0;
  std::int64_t time_origin_ = 1;
  std::vector<std::int64_t> unit_ids_;
  std::vector<std::int64_t> cohort_;
  Eigen::MatrixXd y_;                          // n x T
  std::vector<Eigen::MatrixXd> x_;             // dx matrices, each n x T
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> observed_;
  std::vector<double> exposure_;               // per unit; empty if absent
  std::vector<std::int64_t> adoption_times_;
  int n_never_ = 0;
  bool fully_observed_ = true;
  std::vector<std::int64_t> trimmed_units_;
};

// Validates and assembles a Panel from raw rows. Rejects duplicate cells,
// non-contiguous time grids, and missing (unit, time) combinations; applies
// support trimming per the options.
Panel build_panel(const PanelInput& in, const PanelOptions& opt = {});

// Recovers adoption times from absorbing 0/1 treatment paths (columns are
// periods 1..T). A path that switches from 1 back to 0 is an error.
std::vector<std::int64_t> cohort_from_paths(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>& paths);

}  // namespace stagger

#endif  // STAGGER_PANEL_HPP
