// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#include "stagger/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stagger/errors.hpp"

namespace stagger {

LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) fail(Errc::BadConfig, "least_squares: X/y row mismatch");
  if (X.rows() == 0) fail(Errc::BadConfig, "least_squares: empty system");
  const int p = static_cast<int>(X.cols());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  // Relative rank threshold on the pivoted R diagonal.
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());

  LeastSquares out;
  out.rank = rank;
  out.beta = Eigen::VectorXd::Zero(p);
  if (rank == p) {
    out.beta = qr.solve(y);
  } else {
    // Columns after the first `rank` pivot positions are the (numerically)
    // collinear ones; re-solve on the retained set and leave zeros elsewhere.
    const auto perm = qr.colsPermutation().indices();
    std::vector<int> retained(perm.data(), perm.data() + rank);
    std::sort(retained.begin(), retained.end());
    std::vector<int> dropped(perm.data() + rank, perm.data() + p);
    std::sort(dropped.begin(), dropped.end());
    Eigen::MatrixXd Xr(X.rows(), rank);
    for (int j = 0; j < rank; ++j) Xr.col(j) = X.col(retained[j]);
    const Eigen::VectorXd br = Xr.colPivHouseholderQr().solve(y);
    for (int j = 0; j < rank; ++j) out.beta[retained[j]] = br[j];
    out.dropped = std::move(dropped);
  }
  out.residuals = y - X * out.beta;
  return out;
}

Eigen::MatrixXd alternating_demean(Eigen::MatrixXd V, const std::vector<int>& g1,
                                   const std::vector<int>& g2, int n1, int n2,
                                   double tol, int max_iter, int* iterations) {
  const Eigen::Index R = V.rows();
  if (static_cast<Eigen::Index>(g1.size()) != R ||
      static_cast<Eigen::Index>(g2.size()) != R)
    fail(Errc::BadConfig, "alternating_demean: group id length mismatch");
  if (R == 0) return V;

  std::vector<int> c1(n1, 0), c2(n2, 0);
  for (Eigen::Index r = 0; r < R; ++r) {
    ++c1[g1[r]];
    ++c2[g2[r]];
  }

  Eigen::MatrixXd m1(n1, V.cols()), m2(n2, V.cols());
  int it = 0;
  for (; it < max_iter; ++it) {
    double change = 0.0;
    // Subtract group-1 means.
    m1.setZero();
    for (Eigen::Index r = 0; r < R; ++r) m1.row(g1[r]) += V.row(r);
    for (int g = 0; g < n1; ++g)
      if (c1[g] > 0) m1.row(g) /= static_cast<double>(c1[g]);
    for (Eigen::Index r = 0; r < R; ++r) V.row(r) -= m1.row(g1[r]);
    change = std::max(change, m1.cwiseAbs().maxCoeff());
    // Subtract group-2 means.
    m2.setZero();
    for (Eigen::Index r = 0; r < R; ++r) m2.row(g2[r]) += V.row(r);
    for (int g = 0; g < n2; ++g)
      if (c2[g] > 0) m2.row(g) /= static_cast<double>(c2[g]);
    for (Eigen::Index r = 0; r < R; ++r) V.row(r) -= m2.row(g2[r]);
    change = std::max(change, m2.cwiseAbs().maxCoeff());

    if (change < tol) {
      ++it;
      break;
    }
  }
  if (it >= max_iter)
    fail(Errc::NoConvergence, "alternating demeaning did not converge in " +
                                  std::to_string(max_iter) + " sweeps");
  if (iterations) *iterations = it;
  return V;
}

Eigen::MatrixXd twoway_demean(
    const Eigen::MatrixXd& values,
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& mask,
    double tol, int max_iter, int* iterations) {
  const int n = static_cast<int>(values.rows());
  const int T = static_cast<int>(values.cols());
  if (mask.rows() != n || mask.cols() != T)
    fail(Errc::BadConfig, "twoway_demean: mask shape mismatch");
  std::vector<int> gu, gt;
  std::vector<double> v;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      if (mask(i, t)) {
        gu.push_back(i);
        gt.push_back(t);
        v.push_back(values(i, t));
      }
  Eigen::MatrixXd stacked =
      Eigen::Map<Eigen::MatrixXd>(v.data(), static_cast<Eigen::Index>(v.size()), 1);
  stacked = alternating_demean(stacked, gu, gt, n, T, tol, max_iter, iterations);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, T);
  for (std::size_t r = 0; r < gu.size(); ++r)
    out(gu[r], gt[r]) = stacked(static_cast<Eigen::Index>(r), 0);
  return out;
}

double LogitFit::prob(const Eigen::VectorXd& x) const {
  const double z = beta.dot(x);
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {
// Penalized negative log-likelihood, numerically stable via log1p(exp(-|z|)).
double logit_nll(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
                 const Eigen::VectorXd* w, double ridge, const Eigen::VectorXd& beta) {
  double nll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double z = X.row(i).dot(beta);
    // -log p(y|z) = log(1 + exp(z)) - y z
    const double lse = (z > 0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    const double wi = w ? (*w)[i] : 1.0;
    nll += wi * (lse - (y[i] ? z : 0.0));
  }
  return nll + 0.5 * ridge * beta.squaredNorm();
}
}  // namespace

LogitFit fit_logit(const Eigen::MatrixXd& X, const std::vector<std::uint8_t>& y,
                   const Eigen::VectorXd* weights, double ridge, double tol,
                   int max_iter) {
  const Eigen::Index n = X.rows();
  const int p = static_cast<int>(X.cols());
  if (static_cast<Eigen::Index>(y.size()) != n)
    fail(Errc::BadConfig, "fit_logit: label length mismatch");
  if (n == 0) fail(Errc::BadConfig, "fit_logit: empty sample");
  bool any0 = false, any1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = weights ? (*weights)[i] : 1.0;
    if (wi <= 0.0) continue;
    (y[i] ? any1 : any0) = true;
  }
  if (!any0 || !any1)
    fail(Errc::SingleClass, "fit_logit: outcome takes a single value");

  LogitFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);
  double nll = logit_nll(X, y, weights, ridge, fit.beta);
  Eigen::VectorXd grad(p), step(p);
  Eigen::MatrixXd H(p, p);
  int it = 0;
  for (; it < max_iter; ++it) {
    grad.setZero();
    H = ridge * Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = X.row(i).dot(fit.beta);
      const double pr = 1.0 / (1.0 + std::exp(-z));
      const double wi = weights ? (*weights)[i] : 1.0;
      grad += wi * (pr - (y[i] ? 1.0 : 0.0)) * X.row(i).transpose();
      H += wi * pr * (1.0 - pr) * (X.row(i).transpose() * X.row(i));
    }
    grad += ridge * fit.beta;
    if (grad.cwiseAbs().maxCoeff() < tol) break;

    step = H.ldlt().solve(grad);
    // Newton decrement: the predicted objective decrease of the full step.
    // Once it falls below the objective's rounding floor the monotone line
    // search below cannot measure progress, yet the undamped step is safe
    // (the ridge keeps the objective strictly convex) and quadratically
    // convergent this close to the optimum.
    const double pred = 0.5 * grad.dot(step);
    if (pred <= 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(nll))) {
      fit.beta -= step;
      nll = logit_nll(X, y, weights, ridge, fit.beta);
      continue;
    }
    // Step halving: accept the first damped Newton step that does not
    // increase the penalized objective.
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      const Eigen::VectorXd cand = fit.beta - lambda * step;
      const double cand_nll = logit_nll(X, y, weights, ridge, cand);
      if (cand_nll <= nll + 1e-14) {
        fit.beta = cand;
        nll = cand_nll;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted)
      fail(Errc::NoConvergence, "fit_logit: step halving failed to reduce deviance");
  }
  if (it >= max_iter)
    fail(Errc::NoConvergence,
         "fit_logit: IRLS did not converge in " + std::to_string(max_iter) + " steps");
  fit.iterations = it;
  fit.penalized_nll = nll;
  return fit;
}

Eigen::VectorXd MultinomialFit::probs(const Eigen::VectorXd& x) const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(beta.size()));
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double z = beta[k].dot(x);
    p[static_cast<Eigen::Index>(k)] = 1.0 / (1.0 + std::exp(-z));
  }
  const double s = p.sum();
  if (!(s > 0.0)) fail(Errc::NoConvergence, "multinomial probabilities degenerate");
  return p / s;
}

MultinomialFit fit_multinomial(const Eigen::MatrixXd& X, const std::vector<int>& y,
                               int n_classes, double ridge, double tol, int max_iter) {
  if (n_classes < 2) fail(Errc::BadConfig, "fit_multinomial: need >= 2 classes");
  MultinomialFit fit;
  fit.beta.reserve(n_classes);
  std::vector<std::uint8_t> lab(y.size());
  for (int k = 0; k < n_classes; ++k) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] < 0 || y[i] >= n_classes)
        fail(Errc::BadConfig, "fit_multinomial: label out of range");
      lab[i] = (y[i] == k) ? 1 : 0;
    }
    fit.beta.push_back(fit_logit(X, lab, nullptr, ridge, tol, max_iter).beta);
  }
  return fit;
}

}  // namespace stagger
