#pragma once

// Comparison rankers: Welch t statistics (TT), adaptive-lasso logistic
// contributions (LR) and conditional outlier scores (CO).

#include "rci/errors.hpp"
#include "rci/lasso.hpp"
#include "rci/lingam.hpp"
#include "rci/stats.hpp"
#include "rci/types.hpp"

#include <cmath>
#include <string_view>

namespace rci {

enum class BaselineMethod { TT, LR, CO };

inline std::string_view to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::TT: return "tt";
    case BaselineMethod::LR: return "lr";
    case BaselineMethod::CO: return "co";
  }
  return "?";
}

struct BaselineScores {
  BaselineMethod method = BaselineMethod::TT;
  Matrix scores;  // n x p
  bool converged = true;
};

/// |Welch t| between label classes for every column, replicated per row
/// (rows of `test` when given, otherwise rows of `data`).
inline BaselineScores ttest_scores(const Matrix& data, const Labels& labels,
                                   const Matrix* test = nullptr) {
  detail::require<ParameterError>(data.rows() == labels.size(), "ttest_scores: length mismatch");
  BaselineScores out;
  out.method = BaselineMethod::TT;
  Vector t(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const stats::WelchResult w = stats::welch(data.col(j), labels);
    if (!(w.std_error > 0.0))
      throw ParameterError("ttest_scores: variable " + std::to_string(j + 1) +
                           " has zero within-class variance; t statistic is undefined");
    t[j] = std::fabs(w.t);
  }
  out.scores = t.transpose().replicate(test ? test->rows() : data.rows(), 1);
  return out;
}

/// Per-sample contributions x_k * beta_hat of an adaptive-lasso logistic fit
/// on standardized data. Held-out rows use the training standardization.
inline BaselineScores adaptive_lasso_scores(const Matrix& data, const Labels& labels,
                                            const Matrix* test = nullptr) {
  detail::require<ParameterError>(data.rows() == labels.size(),
                                  "adaptive_lasso_scores: length mismatch");
  const Standardized z = standardize(data);
  const LassoFit fit = adaptive_lasso_logistic(z.data, labels);
  BaselineScores out;
  out.method = BaselineMethod::LR;
  out.scores = (test ? apply_standardize(*test, z.params) : z.data) * fit.coef.asDiagonal();
  out.converged = fit.converged;
  return out;
}

/// |x_i - E(x_i | parents)| / sd(x_i | parents) with parents estimated by an
/// adaptive lasso over causal-order predecessors. Columns whose association
/// test against the labels gives p >= alpha score zero.
inline BaselineScores conditional_outlier_scores(const Matrix& data, const Labels& labels,
                                                 double alpha = 0.2, const Matrix* test = nullptr) {
  detail::require<ParameterError>(data.rows() == labels.size(),
                                  "conditional_outlier_scores: length mismatch");
  detail::require_both_classes(labels, "conditional_outlier_scores");
  const Standardized z = standardize(data);
  const ErrorExtraction order = direct_lingam(data, RootFinder::Plus);

  const Matrix zt = test ? apply_standardize(*test, z.params) : z.data;

  BaselineScores out;
  out.method = BaselineMethod::CO;
  out.scores = Matrix::Zero(zt.rows(), data.cols());
  for (std::size_t pos = 0; pos < order.order.size(); ++pos) {
    const auto i = static_cast<Eigen::Index>(order.order[pos]);
    const Vector y = z.data.col(i);
    if (independence_pvalue(y, labels) >= alpha) continue;
    Matrix preds(data.rows(), static_cast<Eigen::Index>(pos));
    for (std::size_t c = 0; c < pos; ++c)
      preds.col(static_cast<Eigen::Index>(c)) = z.data.col(static_cast<Eigen::Index>(order.order[c]));
    const LassoFit fit = adaptive_lasso_gaussian(preds, y);
    out.converged = out.converged && fit.converged;
    const Vector resid = (y - preds * fit.coef).array() - fit.intercept;
    const double sd = std::sqrt(stats::variance(resid));
    if (!(sd > 1e-12)) continue;
    Matrix test_preds(zt.rows(), preds.cols());
    for (std::size_t c = 0; c < pos; ++c)
      test_preds.col(static_cast<Eigen::Index>(c)) = zt.col(static_cast<Eigen::Index>(order.order[c]));
    const Vector test_resid = (zt.col(i) - test_preds * fit.coef).array() - fit.intercept;
    out.scores.col(i) = test_resid.cwiseAbs() / sd;
  }
  return out;
}

inline BaselineScores baseline_scores(BaselineMethod m, const Matrix& data, const Labels& labels,
                                      double alpha = 0.2, const Matrix* test = nullptr) {
  switch (m) {
    case BaselineMethod::TT: return ttest_scores(data, labels, test);
    case BaselineMethod::LR: return adaptive_lasso_scores(data, labels, test);
    case BaselineMethod::CO: return conditional_outlier_scores(data, labels, alpha, test);
  }
  throw ParameterError("baseline_scores: unknown method");
}

}  // namespace rci
