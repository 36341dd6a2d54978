// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT
//
// Dense two-phase primal simplex with Bland's rule. Problems in this library
// are small (tens to a few hundred rows), so a full tableau is the simplest
// implementation that is exact enough and deterministic: Bland's rule plus
// lowest-index tie-breaking mean the pivot sequence is a pure function of the
// input.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "stagger/errors.hpp"
#include "stagger/regression.hpp"

namespace stagger {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;

struct Tableau {
  // rows m, columns ncol (last column is RHS); obj is the reduced-cost row.
  // obj_val tracks the NEGATIVE of the current objective value, which is the
  // sign under which the pivot update below is exact.
  Eigen::MatrixXd T;
  Eigen::VectorXd obj;
  double obj_val = 0.0;
  std::vector<int> basis;      // basic column per row
  std::vector<bool> banned;    // columns excluded from entering (artificials)

  int m() const { return static_cast<int>(T.rows()); }
  int ncol() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int r = 0; r < m(); ++r) {
      if (r == row) continue;
      const double f = T(r, col);
      if (f != 0.0) T.row(r) -= f * T.row(row);
    }
    const double f = obj[col];
    if (f != 0.0) {
      obj.head(ncol()) -= f * T.row(row).head(ncol()).transpose();
      obj_val -= f * T(row, ncol());
      obj[col] = 0.0;  // exact by construction
    }
    basis[row] = col;
  }

  // Runs simplex iterations to optimality. Returns false on unboundedness.
  bool optimize() {
    const long max_pivots = 20000L + 200L * static_cast<long>(m() + ncol());
    for (long iter = 0; iter < max_pivots; ++iter) {
      // Bland: entering column = lowest index with negative reduced cost.
      int enter = -1;
      for (int j = 0; j < ncol(); ++j) {
        if (banned[j]) continue;
        if (obj[j] < -kReducedCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      // Ratio test; ties by lowest basic index.
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m(); ++r) {
        const double a = T(r, enter);
        if (a > kPivotTol) {
          const double ratio = T(r, ncol()) / a;
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;  // unbounded direction
      pivot(leave, enter);
    }
    fail(Errc::NoConvergence, "simplex exceeded pivot limit");
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  const int m0 = static_cast<int>(p.A.rows());
  const int n0 = static_cast<int>(p.A.cols());
  if (p.c.size() != n0 || p.b.size() != m0 ||
      static_cast<int>(p.rel.size()) != m0 || p.lo.size() != n0 || p.hi.size() != n0)
    fail(Errc::BadConfig, "solve_lp: inconsistent problem dimensions");
  const double inf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n0; ++j)
    if (p.lo[j] > p.hi[j])
      fail(Errc::Infeasible, "variable " + std::to_string(j) + " has lo > hi");

  // --- Transform to nonnegative variables. ---------------------------------
  // kind: 0 shift by lo, 1 flipped around hi, 2 split into x+ - x-.
  struct VarMap {
    int kind;
    int col, col2;
    double offset;
  };
  std::vector<VarMap> vmap(n0);
  int ns = 0;  // structural columns after transform
  for (int j = 0; j < n0; ++j) {
    if (p.lo[j] > -inf) {
      vmap[j] = {0, ns++, -1, p.lo[j]};
    } else if (p.hi[j] < inf) {
      vmap[j] = {1, ns++, -1, p.hi[j]};
    } else {
      vmap[j] = {2, ns, ns + 1, 0.0};
      ns += 2;
    }
  }

  // Rows: original constraints plus one upper-bound row per bounded variable.
  std::vector<int> ub_rows;  // structural column with an upper bound
  std::vector<double> ub_val;
  for (int j = 0; j < n0; ++j) {
    if (vmap[j].kind == 0 && p.hi[j] < inf) {
      ub_rows.push_back(vmap[j].col);
      ub_val.push_back(p.hi[j] - p.lo[j]);
    }
    // kind 1 has an infinite transformed upper bound; kind 2 is unbounded.
  }
  const int m = m0 + static_cast<int>(ub_rows.size());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, ns);
  Eigen::VectorXd b(m);
  std::vector<char> rel(m);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(ns);

  for (int i = 0; i < m0; ++i) {
    double rhs = p.b[i];
    for (int j = 0; j < n0; ++j) {
      const double a = p.A(i, j);
      if (a == 0.0) continue;
      switch (vmap[j].kind) {
        case 0:
          A(i, vmap[j].col) += a;
          rhs -= a * vmap[j].offset;
          break;
        case 1:
          A(i, vmap[j].col) -= a;
          rhs -= a * vmap[j].offset;
          break;
        case 2:
          A(i, vmap[j].col) += a;
          A(i, vmap[j].col2) -= a;
          break;
      }
    }
    b[i] = rhs;
    rel[i] = p.rel[i];
  }
  for (std::size_t u = 0; u < ub_rows.size(); ++u) {
    const int i = m0 + static_cast<int>(u);
    A(i, ub_rows[u]) = 1.0;
    b[i] = ub_val[u];
    rel[i] = '<';
  }
  for (int j = 0; j < n0; ++j) {
    switch (vmap[j].kind) {
      case 0: cost[vmap[j].col] += p.c[j]; break;
      case 1: cost[vmap[j].col] -= p.c[j]; break;
      case 2:
        cost[vmap[j].col] += p.c[j];
        cost[vmap[j].col2] -= p.c[j];
        break;
    }
  }

  // Normalize to b >= 0.
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      A.row(i) = -A.row(i);
      b[i] = -b[i];
      rel[i] = (rel[i] == '<') ? '>' : (rel[i] == '>') ? '<' : '=';
    } else if (rel[i] != '<' && rel[i] != '>' && rel[i] != '=') {
      fail(Errc::BadConfig, "solve_lp: relation must be '<', '>' or '='");
    }
  }

  // --- Assemble the tableau: structural | slacks | artificials | rhs. ------
  int n_slack = 0, n_art = 0;
  for (int i = 0; i < m; ++i) {
    if (rel[i] == '<')
      ++n_slack;
    else if (rel[i] == '>') {
      ++n_slack;
      ++n_art;
    } else
      ++n_art;
  }
  const int ncol = ns + n_slack + n_art;
  Tableau tb;
  tb.T = Eigen::MatrixXd::Zero(m, ncol + 1);
  tb.T.block(0, 0, m, ns) = A;
  tb.T.col(ncol) = b;
  tb.basis.assign(m, -1);
  tb.banned.assign(ncol, false);

  int sc = ns, ac = ns + n_slack;
  std::vector<int> art_cols;
  for (int i = 0; i < m; ++i) {
    if (rel[i] == '<') {
      tb.T(i, sc) = 1.0;
      tb.basis[i] = sc++;
    } else if (rel[i] == '>') {
      tb.T(i, sc) = -1.0;
      ++sc;
      tb.T(i, ac) = 1.0;
      tb.basis[i] = ac;
      art_cols.push_back(ac++);
    } else {
      tb.T(i, ac) = 1.0;
      tb.basis[i] = ac;
      art_cols.push_back(ac++);
    }
  }

  // --- Phase 1: minimize the sum of artificials. ----------------------------
  if (!art_cols.empty()) {
    tb.obj = Eigen::VectorXd::Zero(ncol + 1);
    tb.obj_val = 0.0;
    // Reduced costs of "sum of artificials" given the artificial basis.
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] >= ns + n_slack) {
        tb.obj.head(ncol) -= tb.T.row(i).head(ncol).transpose();
        tb.obj_val -= tb.T(i, ncol);
      }
    }
    for (int c : art_cols) tb.obj[c] = 0.0;
    if (!tb.optimize())
      fail(Errc::NoConvergence, "phase-1 simplex reported unbounded");
    if (-tb.obj_val > kPhase1Tol)
      fail(Errc::Infeasible, "LP infeasible (phase-1 objective " +
                                 std::to_string(-tb.obj_val) + ")");
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] >= ns + n_slack) {
        int piv = -1;
        for (int j = 0; j < ns + n_slack; ++j)
          if (std::abs(tb.T(i, j)) > kPivotTol) {
            piv = j;
            break;
          }
        if (piv >= 0) tb.pivot(i, piv);
        // else: redundant row; the artificial stays basic at zero.
      }
    }
    for (int c : art_cols) tb.banned[c] = true;
  }

  // --- Phase 2. -------------------------------------------------------------
  tb.obj = Eigen::VectorXd::Zero(ncol + 1);
  tb.obj.head(ns) = cost;
  tb.obj_val = 0.0;
  for (int i = 0; i < m; ++i) {
    const int bj = tb.basis[i];
    const double cb = (bj < ns) ? cost[bj] : 0.0;
    if (cb != 0.0) {
      tb.obj.head(ncol) -= cb * tb.T.row(i).head(ncol).transpose();
      tb.obj_val -= cb * tb.T(i, ncol);
    }
  }
  for (int i = 0; i < m; ++i) tb.obj[tb.basis[i]] = 0.0;
  if (!tb.optimize()) fail(Errc::Unbounded, "LP objective is unbounded below");

  // --- Recover the solution in original variables. --------------------------
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(ncol);
  for (int i = 0; i < m; ++i) xs[tb.basis[i]] = tb.T(i, ncol);
  LpSolution sol;
  sol.x.resize(n0);
  for (int j = 0; j < n0; ++j) {
    switch (vmap[j].kind) {
      case 0: sol.x[j] = vmap[j].offset + xs[vmap[j].col]; break;
      case 1: sol.x[j] = vmap[j].offset - xs[vmap[j].col]; break;
      default: sol.x[j] = xs[vmap[j].col] - xs[vmap[j].col2]; break;
    }
  }
  sol.objective = p.c.dot(sol.x);
  return sol;
}

}  // namespace stagger
