// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "stagger/errors.hpp"
#include "stagger/report.hpp"
#include "stagger/rng.hpp"
#include "stagger/sha256.hpp"

using namespace stagger;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("fmt_double: canonical spellings and round-trip") {
  CHECK(fmt_double(0.0) == "0");
  CHECK(fmt_double(-0.0) == "-0");
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(-2.5) == "-2.5");
  // Shortest-exact is not requested; %.17g spells the stored double.
  CHECK(fmt_double(0.89375) == "0.89375000000000004");
  CHECK(fmt_double(0.1) == "0.10000000000000001");
  CHECK(fmt_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(fmt_double(1e300) == "1.0000000000000001e+300");
  CHECK(fmt_double(kNan) == "nan");
  CHECK(fmt_double(kInf) == "inf");
  CHECK(fmt_double(-kInf) == "-inf");

  // 17 significant digits reproduce every double bit-for-bit.
  Rng rng(99);
  std::vector<double> vals;
  for (int i = 0; i < 200; ++i) {
    const double u = rng.uniform() - 0.5;
    vals.push_back(u);
    vals.push_back(u * 1e12);
    vals.push_back(u * 1e-9);
    vals.push_back(rng.normal());
  }
  vals.push_back(1e-300);
  vals.push_back(-1e308);
  vals.push_back(4.9406564584124654e-324);  // smallest subnormal
  for (double v : vals) {
    const double back = std::strtod(fmt_double(v).c_str(), nullptr);
    CHECK(back == v);
  }
}

TEST_CASE("weights CSV: header, rows, and dropped targets") {
  TwfeWeights w;
  WeightDecomposition d0;
  d0.target_k = 0;
  d0.retained = true;
  CellWeight c0;
  c0.g = 2;
  c0.kprime = 0;
  c0.w = 0.75;
  CellWeight c1;
  c1.g = 3;
  c1.kprime = 1;
  c1.w = -0.25;
  d0.weights = {c0, c1};
  WeightDecomposition d1;
  d1.target_k = 5;
  d1.retained = false;  // must not be emitted
  w.per_target = {d0, d1};

  std::ostringstream os;
  write_weights_csv(w, os);
  CHECK(os.str() == "target_k,g,k_prime,weight\n0,2,0,0.75\n0,3,1,-0.25\n");
}

TEST_CASE("diagnostics CSV golden") {
  DiagnosticsReport r;
  DiagnosticsRow a;
  a.k = -2;
  a.N = kNan;
  a.C = kNan;
  a.A = kNan;
  a.S = kNan;
  a.identified = false;
  DiagnosticsRow b;
  b.k = 1;
  b.N = 0.25;
  b.C = 0.5;
  b.A = 1.5;
  b.S = 1.0;
  b.identified = true;
  r.rows = {a, b};

  std::ostringstream os;
  write_diagnostics_csv(r, os);
  CHECK(os.str() ==
        "k,N,C,A,S,identified_flag\n"
        "-2,nan,nan,nan,nan,0\n"
        "1,0.25,0.5,1.5,1,1\n");
}

TEST_CASE("group-time CSV golden") {
  GattCell c;
  c.g = 4;
  c.t = 6;
  c.k = 2;
  c.estimate = -0.125;
  c.se = 0.5;
  c.n_treated = 40;
  c.n_control = 25;
  c.control = ControlKind::NotYetTreated;
  GattTable t;
  t.cells = {c};

  std::ostringstream os;
  write_gatt_csv(t, os);
  CHECK(os.str() ==
        "g,t,k,estimate,se,n_treated,n_control,control_kind\n"
        "4,6,2,-0.125,0.5,40,25,not-yet-treated\n");
}

TEST_CASE("aggregate, cumulative, and imputation CSV goldens") {
  AggregateResult a;
  a.scheme.kind = Scheme::PopulationShare;
  AggregateRow r0;
  r0.k = 0;
  r0.estimate = 1.5;
  r0.se = 0.25;
  AggregateRow r1;
  r1.k = 1;
  r1.estimate = 2.0;
  r1.se = 0.5;
  a.rows = {r0, r1};
  std::ostringstream os;
  write_aggregate_csv(a, os);
  CHECK(os.str() ==
        "k,estimate,se,scheme\n"
        "0,1.5,0.25,population-share\n"
        "1,2,0.5,population-share\n");

  std::ostringstream os2;
  write_cumulative_csv({{0, 1.5, 0.25}, {1, 3.5, 0.75}}, os2);
  CHECK(os2.str() == "k,estimate,se\n0,1.5,0.25\n1,3.5,0.75\n");

  ImputationResult imp;
  imp.rows = {{0, 1.25, 12}, {1, -0.5, 9}};
  std::ostringstream os3;
  write_imputation_csv(imp, os3);
  CHECK(os3.str() == "k,estimate,n_cells\n0,1.25,12\n1,-0.5,9\n");
}

TEST_CASE("region and frontier CSV goldens") {
  RegionResult r;
  RegionCell c;
  c.B = 0.5;
  c.Gamma = 0.25;
  c.DeltaR = 0.0;
  c.admissible = true;
  c.sign_stable = false;
  c.length = 1.25;
  r.cells = {c};
  std::ostringstream os;
  write_region_csv(r, os);
  CHECK(os.str() ==
        "B,Gamma,DeltaR,admissible,sign_stable,length\n"
        "0.5,0.25,0,1,0,1.25\n");

  std::vector<FrontierRow> rows;
  FrontierRow f0;
  f0.B = 0.0;
  f0.DeltaR = 0.25;
  f0.gamma_star = 0.125;
  f0.capped = false;
  FrontierRow f1;
  f1.B = 0.5;
  f1.DeltaR = 0.25;
  f1.gamma_star = 0.5;
  f1.capped = true;
  rows = {f0, f1};
  std::ostringstream os2;
  write_frontier_csv(rows, os2);
  CHECK(os2.str() ==
        "B,DeltaR,Gamma_star,capped_flag\n"
        "0,0.25,0.125,0\n"
        "0.5,0.25,0.5,1\n");
}

TEST_CASE("replication-cell CSV goldens") {
  CellResult c;
  c.spec = Mc81Spec{};  // DeltaR = B = Gamma = 0, dgp 1, n 5000
  c.R = 7;
  c.theta_star = 0.89375;
  EstimatorMetrics m;
  m.kind = EstimatorKind::GroupTime;
  m.n_ok = 5;
  m.n_fail = 2;
  m.bias = -0.125;
  m.rmse = 0.25;
  m.medae = 0.0625;
  m.cov_wald = 0.9375;
  m.len_wald = 1.0;
  m.utex_wald = 0.0;
  m.cov_robust = 1.0;
  m.len_robust = 2.0;
  m.utex_robust = 0.0;
  m.admissible = kNan;
  c.estimators = {m};
  c.rejpre10 = 0.5;
  c.rejpre05 = 0.25;
  c.rejpre01 = 0.0;

  std::ostringstream os;
  write_cell_metrics_csv(c, os);
  CHECK(os.str() ==
        "DeltaR,B,Gamma,dgp,n,R,theta_star,estimator,n_ok,n_fail,bias,rmse,"
        "medae,cov_wald,len_wald,utex_wald,cov_robust,len_robust,utex_robust,"
        "admissible,rejpre10,rejpre05,rejpre01\n"
        "0,0,0,1,5000,7,0.89375000000000004,group-time,5,2,-0.125,0.25,0.0625,"
        "0.9375,1,0,1,2,0,nan,0.5,0.25,0\n");

  ComponentMetric cm;
  cm.g = 4;
  cm.l = 0;
  cm.bias = 0.5;
  cm.rmse = 0.5;
  cm.n_ok = 3;
  c.components[EstimatorKind::DrCrossfit] = {cm};
  std::ostringstream os2;
  write_cell_components_csv(c, os2);
  CHECK(os2.str() == "estimator,g,l,bias,rmse,n_ok\ndr-crossfit,4,0,0.5,0.5,3\n");

  DiagnosticsAssociation d;
  d.k = 2;
  d.mean_N = 0.25;
  d.mean_C = 0.0;
  d.mean_dist = 0.5;
  d.corr_dist_N = -0.5;
  d.corr_dist_C = kNan;
  d.degenerate_N = false;
  d.degenerate_C = true;
  c.diagnostics = {d};
  std::ostringstream os3;
  write_cell_diagnostics_csv(c, os3);
  CHECK(os3.str() ==
        "k,mean_N,mean_C,mean_dist,corr_dist_N,corr_dist_C,degenerate_N,"
        "degenerate_C\n"
        "2,0.25,0,0.5,-0.5,nan,0,1\n");
}

TEST_CASE("placebo-grid and plot CSV goldens") {
  Mc84Row row;
  row.DeltaR = 0.25;
  row.B = 0.0;
  row.Gamma = 0.5;
  row.cell.R = 16;
  row.cell.rej10 = 0.125;
  row.cell.rej05 = 0.0625;
  row.cell.rej01 = 0.0;
  row.cell.bias = -0.25;
  row.cell.rmse = 0.5;
  row.cell.cov_wald = 0.9375;
  row.cell.len_wald = 1.5;
  row.cell.cov_robust = 1.0;
  row.cell.len_robust = 2.5;
  std::ostringstream os;
  write_mc84_csv({row}, os);
  CHECK(os.str() ==
        "DeltaR,B,Gamma,R,rej10,rej05,rej01,bias,rmse,cov_wald,len_wald,"
        "cov_robust,len_robust\n"
        "0.25,0,0.5,16,0.125,0.0625,0,-0.25,0.5,0.9375,1.5,1,2.5\n");

  std::ostringstream os2;
  write_plot_csv({{1.5, -0.5, "frontier"}, {2.0, 0.25, "frontier"}}, os2);
  CHECK(os2.str() == "x,y,series\n1.5,-0.5,frontier\n2,0.25,frontier\n");
}

TEST_CASE("sha-256 digests match the FIPS 180-4 test vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
        "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
  // Two-block message (56 bytes pushes the length field past one block).
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("text-file sink round-trips bytes and reports IO errors") {
  const std::string path = "stagger_report_roundtrip.tmp";
  const std::string body = "alpha,beta\n1,2\n";
  write_text_file(path, body);
  CHECK(sha256_file_hex(path) == sha256_hex(body));
  std::remove(path.c_str());

  CHECK_THROWS_AS(write_text_file("no_such_dir/x/y/z.csv", "x"), Error);
  CHECK_THROWS_AS(sha256_file_hex("definitely_missing_file.bin"), Error);
  CHECK(std::string(kVersion) == "0.1.0");
}
