// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "stagger/errors.hpp"

namespace stagger {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
std::string fmt_flag(bool b) { return b ? "1" : "0"; }
}  // namespace

void write_weights_csv(const TwfeWeights& w, std::ostream& out) {
  out << "target_k,g,k_prime,weight\n";
  for (const WeightDecomposition& d : w.per_target) {
    if (!d.retained) continue;
    for (const CellWeight& c : d.weights)
      out << d.target_k << ',' << c.g << ',' << c.kprime << ',' << fmt_double(c.w)
          << '\n';
  }
}

void write_diagnostics_csv(const DiagnosticsReport& r, std::ostream& out) {
  out << "k,N,C,A,S,identified_flag\n";
  for (const DiagnosticsRow& row : r.rows)
    out << row.k << ',' << fmt_double(row.N) << ',' << fmt_double(row.C) << ','
        << fmt_double(row.A) << ',' << fmt_double(row.S) << ','
        << fmt_flag(row.identified) << '\n';
}

void write_gatt_csv(const GattTable& t, std::ostream& out) {
  out << "g,t,k,estimate,se,n_treated,n_control,control_kind\n";
  for (const GattCell& c : t.cells)
    out << c.g << ',' << c.t << ',' << c.k << ',' << fmt_double(c.estimate) << ','
        << fmt_double(c.se) << ',' << c.n_treated << ',' << c.n_control << ','
        << control_name(c.control) << '\n';
}

void write_aggregate_csv(const AggregateResult& a, std::ostream& out) {
  out << "k,estimate,se,scheme\n";
  for (const AggregateRow& r : a.rows)
    out << r.k << ',' << fmt_double(r.estimate) << ',' << fmt_double(r.se) << ','
        << scheme_name(a.scheme.kind) << '\n';
}

void write_cumulative_csv(const std::vector<CumulativeRow>& rows, std::ostream& out) {
  out << "k,estimate,se\n";
  for (const CumulativeRow& r : rows)
    out << r.k << ',' << fmt_double(r.estimate) << ',' << fmt_double(r.se) << '\n';
}

void write_imputation_csv(const ImputationResult& r, std::ostream& out) {
  out << "k,estimate,n_cells\n";
  for (const ImputationRow& row : r.rows)
    out << row.k << ',' << fmt_double(row.estimate) << ',' << row.n_cells << '\n';
}

void write_region_csv(const RegionResult& r, std::ostream& out) {
  out << "B,Gamma,DeltaR,admissible,sign_stable,length\n";
  for (const RegionCell& c : r.cells)
    out << fmt_double(c.B) << ',' << fmt_double(c.Gamma) << ',' << fmt_double(c.DeltaR)
        << ',' << fmt_flag(c.admissible) << ',' << fmt_flag(c.sign_stable) << ','
        << fmt_double(c.length) << '\n';
}

void write_frontier_csv(const std::vector<FrontierRow>& rows, std::ostream& out) {
  out << "B,DeltaR,Gamma_star,capped_flag\n";
  for (const FrontierRow& r : rows)
    out << fmt_double(r.B) << ',' << fmt_double(r.DeltaR) << ','
        << fmt_double(r.gamma_star) << ',' << fmt_flag(r.capped) << '\n';
}

void write_cell_metrics_csv(const CellResult& c, std::ostream& out) {
  out << "DeltaR,B,Gamma,dgp,n,R,theta_star,estimator,n_ok,n_fail,bias,rmse,medae,"
         "cov_wald,len_wald,utex_wald,cov_robust,len_robust,utex_robust,admissible,"
         "rejpre10,rejpre05,rejpre01\n";
  for (const EstimatorMetrics& m : c.estimators)
    out << fmt_double(c.spec.DeltaR) << ',' << fmt_double(c.spec.B) << ','
        << fmt_double(c.spec.Gamma) << ',' << c.spec.dgp << ',' << c.spec.n << ','
        << c.R << ',' << fmt_double(c.theta_star) << ',' << estimator_name(m.kind)
        << ',' << m.n_ok << ',' << m.n_fail << ',' << fmt_double(m.bias) << ','
        << fmt_double(m.rmse) << ',' << fmt_double(m.medae) << ','
        << fmt_double(m.cov_wald) << ',' << fmt_double(m.len_wald) << ','
        << fmt_double(m.utex_wald) << ',' << fmt_double(m.cov_robust) << ','
        << fmt_double(m.len_robust) << ',' << fmt_double(m.utex_robust) << ','
        << fmt_double(m.admissible) << ',' << fmt_double(c.rejpre10) << ','
        << fmt_double(c.rejpre05) << ',' << fmt_double(c.rejpre01) << '\n';
}

void write_cell_components_csv(const CellResult& c, std::ostream& out) {
  out << "estimator,g,l,bias,rmse,n_ok\n";
  for (const auto& [kind, comps] : c.components)
    for (const ComponentMetric& cm : comps)
      out << estimator_name(kind) << ',' << cm.g << ',' << cm.l << ','
          << fmt_double(cm.bias) << ',' << fmt_double(cm.rmse) << ',' << cm.n_ok
          << '\n';
}

void write_cell_diagnostics_csv(const CellResult& c, std::ostream& out) {
  out << "k,mean_N,mean_C,mean_dist,corr_dist_N,corr_dist_C,degenerate_N,"
         "degenerate_C\n";
  for (const DiagnosticsAssociation& d : c.diagnostics)
    out << d.k << ',' << fmt_double(d.mean_N) << ',' << fmt_double(d.mean_C) << ','
        << fmt_double(d.mean_dist) << ',' << fmt_double(d.corr_dist_N) << ','
        << fmt_double(d.corr_dist_C) << ',' << fmt_flag(d.degenerate_N) << ','
        << fmt_flag(d.degenerate_C) << '\n';
}

void write_mc84_csv(const std::vector<Mc84Row>& rows, std::ostream& out) {
  out << "DeltaR,B,Gamma,R,rej10,rej05,rej01,bias,rmse,cov_wald,len_wald,"
         "cov_robust,len_robust\n";
  for (const Mc84Row& r : rows)
    out << fmt_double(r.DeltaR) << ',' << fmt_double(r.B) << ','
        << fmt_double(r.Gamma) << ',' << r.cell.R << ',' << fmt_double(r.cell.rej10)
        << ',' << fmt_double(r.cell.rej05) << ',' << fmt_double(r.cell.rej01) << ','
        << fmt_double(r.cell.bias) << ',' << fmt_double(r.cell.rmse) << ','
        << fmt_double(r.cell.cov_wald) << ',' << fmt_double(r.cell.len_wald) << ','
        << fmt_double(r.cell.cov_robust) << ',' << fmt_double(r.cell.len_robust)
        << '\n';
}

void write_plot_csv(const std::vector<PlotPoint>& pts, std::ostream& out) {
  out << "x,y,series\n";
  for (const PlotPoint& p : pts)
    out << fmt_double(p.x) << ',' << fmt_double(p.y) << ',' << p.series << '\n';
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open output file: " + path);
  out << contents;
  if (!out) fail(Errc::IoError, "failed writing output file: " + path);
}

}  // namespace stagger
