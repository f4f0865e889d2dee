#pragma once

#include "rci/errors.hpp"
#include "rci/stats.hpp"
#include "rci/types.hpp"

#include <cmath>

namespace rci {

struct LogisticModel {
  Vector delta;  // one coefficient per column of the design
  double intercept = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct LogisticOptions {
  double tolerance = 1e-8;  // max absolute coefficient change
  std::size_t max_iterations = 100;
  double ridge = 1e-8;  // added to the diagonal of the normal equations
};

namespace detail {

// Negative log-likelihood plus the ridge term, computed stably.
inline double penalized_nll(const Vector& eta, const Labels& y, const Vector& coef, double ridge) {
  double nll = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    const double e = eta[k];
    const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    nll += softplus - (y[k] == 1 ? e : 0.0);
  }
  return nll + 0.5 * ridge * coef.squaredNorm();
}

inline void require_both_classes(const Labels& y, const char* who) {
  const auto ones = (y.array() == 1).count();
  const auto zeros = (y.array() == 0).count();
  require<ParameterError>(ones + zeros == y.size(), std::string(who) + ": labels must be 0/1");
  require<ParameterError>(ones > 0 && zeros > 0, std::string(who) + ": labels must contain both classes");
}

}  // namespace detail

/// Logistic regression of y on the columns of x (plus an intercept) by
/// iteratively reweighted least squares with step halving. Non-convergence
/// is reported through `converged`, never by throwing.
inline LogisticModel fit_logistic(const Matrix& x, const Labels& y, const LogisticOptions& opt = {}) {
  detail::require<ParameterError>(x.rows() == y.size(), "fit_logistic: row count must match labels");
  detail::require_both_classes(y, "fit_logistic");
  detail::require<ParameterError>(x.rows() > x.cols(), "fit_logistic: need more samples than columns");

  const Eigen::Index n = x.rows();
  const Eigen::Index r = x.cols();
  Matrix design(n, r + 1);
  design.col(0).setOnes();
  design.rightCols(r) = x;
  const Vector yv = y.cast<double>();

  // Start from the intercept-only optimum.
  const double pbar = yv.mean();
  Vector coef = Vector::Zero(r + 1);
  coef[0] = std::log(pbar / (1.0 - pbar));
  Vector eta = design * coef;
  double obj = detail::penalized_nll(eta, y, coef, opt.ridge);

  LogisticModel model;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    model.iterations = it;
    Vector mu(n), w(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      mu[k] = stats::logistic(eta[k]);
      w[k] = mu[k] * (1.0 - mu[k]);
    }
    Matrix hess = design.transpose() * w.asDiagonal() * design;
    hess.diagonal().array() += opt.ridge;
    const Vector grad = design.transpose() * (yv - mu) - opt.ridge * coef;
    Vector step = hess.ldlt().solve(grad);
    if (!step.allFinite()) break;
    if (step.cwiseAbs().maxCoeff() < opt.tolerance) {
      coef += step;
      model.converged = true;
      break;
    }

    // Halve until the penalized objective does not increase.
    Vector next = coef + step;
    Vector next_eta = design * next;
    double next_obj = detail::penalized_nll(next_eta, y, next, opt.ridge);
    for (int h = 0; h < 30 && !(next_obj <= obj); ++h) {
      step *= 0.5;
      next = coef + step;
      next_eta = design * next;
      next_obj = detail::penalized_nll(next_eta, y, next, opt.ridge);
    }
    if (!next.allFinite() || !(next_obj <= obj)) break;

    coef = std::move(next);
    eta = std::move(next_eta);
    obj = next_obj;
  }
  model.intercept = coef[0];
  model.delta = coef.tail(r);
  return model;
}

}  // namespace rci
