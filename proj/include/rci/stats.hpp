#pragma once

// Small descriptive-statistics helpers. Population convention (divisor n)
// throughout.

#include "rci/errors.hpp"
#include "rci/types.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace rci::stats {

inline double mean(const Eigen::Ref<const Vector>& x) { return x.mean(); }

inline double variance(const Eigen::Ref<const Vector>& x) {
  const double m = x.mean();
  return (x.array() - m).square().mean();
}

inline double covariance(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const double mx = x.mean();
  const double my = y.mean();
  return ((x.array() - mx) * (y.array() - my)).mean();
}

inline double correlation(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  return covariance(x, y) / std::sqrt(variance(x) * variance(y));
}

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Two-sided p-value for a t statistic with `df` degrees of freedom.
inline double two_sided_t_pvalue(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return std::min(1.0, std::max(0.0, p));
}

/// Welch two-sample t statistic and Satterthwaite degrees of freedom between
/// the entries of `x` labelled 1 and those labelled 0. Sample variances use
/// divisor (n_c - 1) as the test requires.
struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double std_error = 0.0;
  double mean_diff = 0.0;
};

inline WelchResult welch(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Labels>& d) {
  detail::require<ParameterError>(x.size() == d.size(), "welch: length mismatch");
  double s1 = 0, s0 = 0;
  long n1 = 0, n0 = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (d[k] == 1) {
      s1 += x[k];
      ++n1;
    } else {
      s0 += x[k];
      ++n0;
    }
  }
  detail::require<ParameterError>(n1 >= 2 && n0 >= 2,
                                  "welch: each class needs at least two samples");
  const double m1 = s1 / static_cast<double>(n1);
  const double m0 = s0 / static_cast<double>(n0);
  double ss1 = 0, ss0 = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (d[k] == 1)
      ss1 += (x[k] - m1) * (x[k] - m1);
    else
      ss0 += (x[k] - m0) * (x[k] - m0);
  }
  const double v1 = ss1 / static_cast<double>(n1 - 1) / static_cast<double>(n1);
  const double v0 = ss0 / static_cast<double>(n0 - 1) / static_cast<double>(n0);
  WelchResult r;
  r.mean_diff = m1 - m0;
  r.std_error = std::sqrt(v1 + v0);
  r.t = r.mean_diff / r.std_error;
  const double num = (v1 + v0) * (v1 + v0);
  const double den = v1 * v1 / static_cast<double>(n1 - 1) + v0 * v0 / static_cast<double>(n0 - 1);
  r.df = den > 0 ? num / den : static_cast<double>(n1 + n0 - 2);
  return r;
}

}  // namespace rci::stats
