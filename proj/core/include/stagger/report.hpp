// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_REPORT_HPP
#define STAGGER_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "stagger/diagnostics.hpp"
#include "stagger/group_time.hpp"
#include "stagger/montecarlo.hpp"
#include "stagger/sensitivity.hpp"
#include "stagger/twfe.hpp"

namespace stagger {

inline constexpr const char* kVersion = "0.1.0";

// Canonical numeric formatting for all text output: shortest round-trip via
// %.17g, with non-finite values spelled "nan", "inf", "-inf". Using one
// formatter everywhere is what makes byte-identical reruns meaningful.
std::string fmt_double(double v);

// CSV writers. Columns are part of the public interface and are stable.
void write_weights_csv(const TwfeWeights& w, std::ostream& out);
void write_diagnostics_csv(const DiagnosticsReport& r, std::ostream& out);
void write_gatt_csv(const GattTable& t, std::ostream& out);
void write_aggregate_csv(const AggregateResult& a, std::ostream& out);
void write_cumulative_csv(const std::vector<CumulativeRow>& rows, std::ostream& out);
void write_imputation_csv(const ImputationResult& r, std::ostream& out);
void write_region_csv(const RegionResult& r, std::ostream& out);

struct FrontierRow {
  double B = 0, DeltaR = 0, gamma_star = 0;
  bool capped = false;
};
void write_frontier_csv(const std::vector<FrontierRow>& rows, std::ostream& out);

// Replication tables.
void write_cell_metrics_csv(const CellResult& c, std::ostream& out);
void write_cell_components_csv(const CellResult& c, std::ostream& out);
void write_cell_diagnostics_csv(const CellResult& c, std::ostream& out);

struct Mc84Row {
  double DeltaR = 0, B = 0, Gamma = 0;
  Mc84CellResult cell;
};
void write_mc84_csv(const std::vector<Mc84Row>& rows, std::ostream& out);

// Long-format plot fragment (x, y, series), ready for any plotting frontend.
struct PlotPoint {
  double x = 0, y = 0;
  std::string series;
};
void write_plot_csv(const std::vector<PlotPoint>& pts, std::ostream& out);

// Convenience file sinks (IoError on failure to open or write).
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace stagger

#endif  // STAGGER_REPORT_HPP
