#pragma once

// Adaptive lasso (weights 1/|initial estimate|, gamma = 1) for Gaussian and
// logistic responses. Coordinate descent on the (weighted) least-squares
// objective; the logistic fit wraps it in IRLS. The penalty level is chosen
// by BIC over a 50-point log grid spanning [1e-4, 1e1] * lambda_max.

#include "rci/errors.hpp"
#include "rci/logistic.hpp"
#include "rci/stats.hpp"
#include "rci/types.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace rci {

struct LassoFit {
  Vector coef;
  double intercept = 0.0;
  double lambda = 0.0;
  double bic = 0.0;
  bool converged = true;
};

namespace detail {

struct CdOptions {
  double tolerance = 1e-9;
  std::size_t max_sweeps = 1000;
};

// Minimizes 0.5 * sum_k w_k (z_k - b0 - x_k beta)^2 + lambda * sum_j pf_j |beta_j|
// in place. Columns with pf_j = inf stay at zero.
inline bool weighted_lasso_cd(const Matrix& x, const Vector& z, const Vector& w, double lambda,
                              const Vector& pf, Vector& beta, double& b0, const CdOptions& opt = {}) {
  const Eigen::Index p = x.cols();
  const double wsum = w.sum();
  Vector xwx(p);
  for (Eigen::Index j = 0; j < p; ++j) xwx[j] = (w.array() * x.col(j).array().square()).sum();
  Vector r = z - x * beta;
  r.array() -= b0;
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_change = 0.0;
    const double db0 = (w.array() * r.array()).sum() / wsum;
    b0 += db0;
    r.array() -= db0;
    max_change = std::max(max_change, std::fabs(db0) * std::sqrt(wsum));
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(pf[j]) || xwx[j] <= 0.0) {
        if (beta[j] != 0.0) {
          r += beta[j] * x.col(j);
          beta[j] = 0.0;
        }
        continue;
      }
      const double g = (w.array() * x.col(j).array() * r.array()).sum() + xwx[j] * beta[j];
      const double thr = lambda * pf[j];
      const double nb = g > thr ? (g - thr) / xwx[j] : (g < -thr ? (g + thr) / xwx[j] : 0.0);
      const double d = nb - beta[j];
      if (d != 0.0) {
        r -= d * x.col(j);
        beta[j] = nb;
        max_change = std::max(max_change, std::fabs(d) * std::sqrt(xwx[j]));
      }
    }
    if (max_change < opt.tolerance) return true;
  }
  return false;
}

inline Vector adaptive_penalty(const Vector& initial) {
  Vector pf(initial.size());
  for (Eigen::Index j = 0; j < initial.size(); ++j)
    pf[j] = initial[j] != 0.0 ? 1.0 / std::fabs(initial[j]) : std::numeric_limits<double>::infinity();
  return pf;
}

inline std::vector<double> lambda_grid(double lambda_max, std::size_t points = 50) {
  std::vector<double> grid(points);
  const double hi = std::log(1e1 * lambda_max);
  const double lo = std::log(1e-4 * lambda_max);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::exp(hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

inline double lambda_max(const Matrix& x, const Vector& resid, const Vector& pf, double scale) {
  double lm = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (std::isfinite(pf[j])) lm = std::max(lm, std::fabs(x.col(j).dot(resid)) * scale / pf[j]);
  return lm > 0.0 ? lm : 1.0;
}

inline std::size_t nonzeros(const Vector& v) { return static_cast<std::size_t>((v.array() != 0.0).count()); }

}  // namespace detail

/// Adaptive-lasso linear regression of y on x with BIC-selected penalty.
/// When `refit` is set the selected support is refitted by least squares.
inline LassoFit adaptive_lasso_gaussian(const Matrix& x, const Vector& y, bool refit = true) {
  detail::require<ParameterError>(x.rows() == y.size(), "adaptive_lasso_gaussian: length mismatch");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double dn = static_cast<double>(n);
  LassoFit best;
  best.coef = Vector::Zero(p);
  best.intercept = y.mean();
  if (p == 0) return best;

  // Initial least-squares estimate on centered data.
  const Vector xm = x.colwise().mean();
  const Matrix xc = x.rowwise() - xm.transpose();
  const Vector yc = y.array() - y.mean();
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += 1e-8 * dn;
  const Vector initial = gram.ldlt().solve(xc.transpose() * yc);
  const Vector pf = detail::adaptive_penalty(initial);

  const Vector w = Vector::Constant(n, 1.0 / dn);
  const double lmax = detail::lambda_max(x, yc, pf, 1.0 / dn);
  Vector beta = Vector::Zero(p);
  double b0 = y.mean();
  best.bic = std::numeric_limits<double>::infinity();
  for (const double lambda : detail::lambda_grid(lmax)) {
    const bool ok = detail::weighted_lasso_cd(x, y, w, lambda, pf, beta, b0);
    const Vector resid = (y - x * beta).array() - b0;
    const double rss = std::max(resid.squaredNorm(), 1e-300);
    const double bic = dn * std::log(rss / dn) + std::log(dn) * static_cast<double>(detail::nonzeros(beta));
    if (bic < best.bic) {
      best.bic = bic;
      best.coef = beta;
      best.intercept = b0;
      best.lambda = lambda;
      best.converged = ok;
    }
  }

  if (refit) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < p; ++j)
      if (best.coef[j] != 0.0) support.push_back(j);
    best.coef.setZero();
    if (!support.empty()) {
      Matrix xs(n, static_cast<Eigen::Index>(support.size()));
      for (std::size_t c = 0; c < support.size(); ++c) xs.col(static_cast<Eigen::Index>(c)) = xc.col(support[c]);
      Matrix g = xs.transpose() * xs;
      g.diagonal().array() += 1e-10 * dn;
      const Vector b = g.ldlt().solve(xs.transpose() * yc);
      for (std::size_t c = 0; c < support.size(); ++c) best.coef[support[c]] = b[static_cast<Eigen::Index>(c)];
    }
    best.intercept = y.mean() - xm.dot(best.coef);
  }
  return best;
}

/// Adaptive-lasso logistic regression with BIC-selected penalty. The
/// objective is the mean negative log-likelihood plus the weighted L1 term.
inline LassoFit adaptive_lasso_logistic(const Matrix& x, const Labels& y) {
  detail::require<ParameterError>(x.rows() == y.size(), "adaptive_lasso_logistic: length mismatch");
  detail::require_both_classes(y, "adaptive_lasso_logistic");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double dn = static_cast<double>(n);
  const Vector yv = y.cast<double>();
  const double pbar = yv.mean();

  LassoFit best;
  best.coef = Vector::Zero(p);
  best.intercept = std::log(pbar / (1.0 - pbar));
  if (p == 0) return best;

  const LogisticModel initial = fit_logistic(x, y);
  const Vector pf = detail::adaptive_penalty(initial.delta);
  const double lmax = detail::lambda_max(x, (yv.array() - pbar).matrix(), pf, 1.0 / dn);

  Vector beta = Vector::Zero(p);
  double b0 = best.intercept;
  best.bic = std::numeric_limits<double>::infinity();
  Vector eta(n), mu(n), w(n), z(n);
  for (const double lambda : detail::lambda_grid(lmax)) {
    bool ok = false;
    for (int outer = 0; outer < 50; ++outer) {
      eta = (x * beta).array() + b0;
      for (Eigen::Index k = 0; k < n; ++k) {
        mu[k] = stats::logistic(eta[k]);
        const double v = std::max(mu[k] * (1.0 - mu[k]), 1e-5);
        w[k] = v / dn;
        z[k] = eta[k] + (yv[k] - mu[k]) / v;
      }
      const Vector prev = beta;
      const double prev_b0 = b0;
      detail::weighted_lasso_cd(x, z, w, lambda, pf, beta, b0);
      const double change = std::max((beta - prev).cwiseAbs().maxCoeff(), std::fabs(b0 - prev_b0));
      if (change < 1e-7) {
        ok = true;
        break;
      }
    }
    eta = (x * beta).array() + b0;
    const double nll = detail::penalized_nll(eta, y, beta, 0.0);
    const double bic = 2.0 * nll + std::log(dn) * static_cast<double>(detail::nonzeros(beta));
    if (bic < best.bic) {
      best.bic = bic;
      best.coef = beta;
      best.intercept = b0;
      best.lambda = lambda;
      best.converged = ok;
    }
  }
  return best;
}

}  // namespace rci
