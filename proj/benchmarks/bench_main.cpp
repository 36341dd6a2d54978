// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT
//
// Micro-benchmarks for the numeric kernels: two-way demeaning, pivoted least
// squares, implicit-weight decomposition, the group-time table, cross-fitted
// orthogonal estimation, the identified-set LP, and one small replication
// cell. All inputs are seeded, so timings compare like with like.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stagger/group_time.hpp"
#include "stagger/montecarlo.hpp"
#include "stagger/panel.hpp"
#include "stagger/regression.hpp"
#include "stagger/rng.hpp"
#include "stagger/scores.hpp"
#include "stagger/sensitivity.hpp"
#include "stagger/twfe.hpp"

using namespace stagger;

namespace {

Panel mc81_panel(int n) {
  Mc81Spec s;
  s.n = n;
  return simulate_mc81(s, 42);
}

void BM_TwowayDemean(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), T = 12;
  Rng rng(7);
  Eigen::MatrixXd V(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) V(i, t) = rng.normal();
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask(n, T);
  mask.setOnes();
  for (auto _ : state) {
    Eigen::MatrixXd out = twoway_demean(V, mask);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_TwowayDemean)->Arg(1000)->Arg(5000);

void BM_LeastSquares(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), p = 24;
  Rng rng(11);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    y[i] = rng.normal();
  }
  for (auto _ : state) {
    LeastSquares fit = least_squares(X, y);
    benchmark::DoNotOptimize(fit.beta.data());
  }
}
BENCHMARK(BM_LeastSquares)->Arg(2000)->Arg(10000);

void BM_ImplicitWeights(benchmark::State& state) {
  const Panel p = mc81_panel(static_cast<int>(state.range(0)));
  const EventWindow w = default_window(p);
  for (auto _ : state) {
    TwfeWeights tw = implicit_weights(p, w);
    benchmark::DoNotOptimize(tw.per_target.data());
  }
}
BENCHMARK(BM_ImplicitWeights)->Arg(500)->Arg(2000);

void BM_GattTable(benchmark::State& state) {
  const Panel p = mc81_panel(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    GattTable t = gatt_table(p, ControlKind::NeverTreated);
    benchmark::DoNotOptimize(t.cells.data());
  }
}
BENCHMARK(BM_GattTable)->Arg(2000)->Arg(5000);

void BM_CrossfitGatt(benchmark::State& state) {
  Mc85Spec s = mc85_default();
  s.n = static_cast<int>(state.range(0));
  const Panel p = simulate_mc85(s, 19);
  for (auto _ : state) {
    CrossfitResult r = crossfit_gatt(p, 4, 4, 5, 23);
    benchmark::DoNotOptimize(r.theta);
  }
}
BENCHMARK(BM_CrossfitGatt)->Arg(1000);

void BM_IdentifiedSetLp(benchmark::State& state) {
  Rng rng(29);
  DeviationMap m;
  m.T = static_cast<int>(state.range(0));
  m.theta_hat = 0.4;
  m.cohorts = {2, 4, 6};
  for (std::int64_t g : m.cohorts)
    for (int t = 1; t <= m.T; ++t) m.coef[{g, t}] = rng.normal();
  RestrictionClass rc;
  rc.B = 0.3;
  rc.Gamma = 0.1;
  rc.DeltaR = 0.5;
  for (auto _ : state) {
    IdentifiedSet s = identified_set(m, rc);
    benchmark::DoNotOptimize(s.interval.lo);
  }
}
BENCHMARK(BM_IdentifiedSetLp)->Arg(8)->Arg(16);

void BM_Mc84Cell(benchmark::State& state) {
  Mc84Spec s;
  s.DeltaR = 0.25;
  s.Gamma = 0.10;
  for (auto _ : state) {
    Mc84CellResult r = mc84_run(s, 50, 1, 1);
    benchmark::DoNotOptimize(r.rej05);
  }
}
BENCHMARK(BM_Mc84Cell);

void BM_RunCellSmall(benchmark::State& state) {
  Mc81Spec s;
  s.n = 200;
  RunCellOptions opt;
  opt.threads = 1;
  opt.diagnostics = false;
  for (auto _ : state) {
    CellResult r = run_cell(s, {EstimatorKind::GroupTime}, 3, 5, opt);
    benchmark::DoNotOptimize(r.estimators.data());
  }
}
BENCHMARK(BM_RunCellSmall);

}  // namespace

BENCHMARK_MAIN();
