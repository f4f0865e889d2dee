#pragma once

// DirectLiNGAM error extraction with the lazy root search and the
// label-guided ancestor screen.
//
// Conventions: data matrices are n x p, one sample per row. Variances use
// divisor n. Variable indices are 0-based internally.

#include "rci/errors.hpp"
#include "rci/stats.hpp"
#include "rci/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace rci {

// ---------------------------------------------------------------------------
// Standardization

struct StandardizationParams {
  Vector means;
  Vector stddevs;  // population convention, all > 0
};

/// (x - mean) / stddev per column using fixed parameters.
inline Matrix apply_standardize(const Matrix& data, const StandardizationParams& params) {
  detail::require<ParameterError>(data.cols() == params.means.size() &&
                                      data.cols() == params.stddevs.size(),
                                  "apply_standardize: column count does not match parameters");
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    out.col(j) = (data.col(j).array() - params.means[j]) / params.stddevs[j];
  return out;
}

inline StandardizationParams fit_standardization(const Matrix& data) {
  detail::require<ParameterError>(data.rows() >= 2, "standardize: need at least two rows");
  StandardizationParams params;
  params.means.resize(data.cols());
  params.stddevs.resize(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    params.means[j] = data.col(j).mean();
    const double var = (data.col(j).array() - params.means[j]).square().mean();
    if (!(var > 1e-24))
      throw DegenerateInputError("standardize: column " + std::to_string(j + 1) +
                                 " has zero variance");
    params.stddevs[j] = std::sqrt(var);
  }
  return params;
}

struct Standardized {
  Matrix data;
  StandardizationParams params;
};

/// Zero mean, unit population variance per column. The returned data is
/// exactly `apply_standardize(data, params)`.
inline Standardized standardize(const Matrix& data) {
  Standardized s;
  s.params = fit_standardization(data);
  s.data = apply_standardize(data, s.params);
  return s;
}

// ---------------------------------------------------------------------------
// Entropy approximation and the pairwise likelihood-ratio measure

namespace entropy_constants {
inline constexpr double k1 = 79.047;
inline constexpr double k2 = 7.4129;
inline constexpr double gaussian_log_cosh = 0.37457;  // E log cosh(Z), Z ~ N(0,1)
inline const double gaussian_entropy = (1.0 + std::log(2.0 * std::numbers::pi)) / 2.0;
}  // namespace entropy_constants

namespace detail {

inline constexpr double kDegenerateVariance = 1e-12;

inline double log_cosh(double y) {
  const double a = std::fabs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

inline double entropy_from_moments(double mean_log_cosh, double mean_gauss) {
  using namespace entropy_constants;
  const double a = mean_log_cosh - gaussian_log_cosh;
  return gaussian_entropy - k1 * a * a - k2 * mean_gauss * mean_gauss;
}

// Entropy of the re-standardized residual of `a` regressed on `b`:
// r = (a - mean a) - slope (b - mean b), slope = cov(a,b)/var(b).
inline double residual_entropy(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                               double mean_a, double mean_b, double var_b, double cov_ab,
                               std::size_t ia, std::size_t ib) {
  const Eigen::Index n = a.size();
  const double slope = cov_ab / var_b;
  double s = 0.0, ss = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = (a[k] - mean_a) - slope * (b[k] - mean_b);
    s += r;
    ss += r * r;
  }
  const double dn = static_cast<double>(n);
  const double mr = s / dn;
  const double vr = ss / dn - mr * mr;
  if (!(vr >= kDegenerateVariance))
    throw DegenerateInputError("residual of variable " + std::to_string(ia + 1) + " on variable " +
                               std::to_string(ib + 1) + " has zero variance (collinear pair)");
  const double inv_sd = 1.0 / std::sqrt(vr);
  double lc = 0.0, g = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double y = ((a[k] - mean_a) - slope * (b[k] - mean_b) - mr) * inv_sd;
    lc += log_cosh(y);
    g += y * std::exp(-0.5 * y * y);
  }
  return entropy_from_moments(lc / dn, g / dn);
}

// C_ij given cached marginal entropies. Written as a difference of two sums
// so that swapping the arguments negates the result exactly.
inline double pairwise_measure_cached(const Eigen::Ref<const Vector>& xi,
                                      const Eigen::Ref<const Vector>& xj, double hi, double hj,
                                      std::size_t i, std::size_t j) {
  const double mi = xi.mean();
  const double mj = xj.mean();
  const double vi = (xi.array() - mi).square().mean();
  const double vj = (xj.array() - mj).square().mean();
  const double cij = ((xi.array() - mi) * (xj.array() - mj)).mean();
  if (!(vi >= kDegenerateVariance) || !(vj >= kDegenerateVariance))
    throw DegenerateInputError("pairwise measure: variable " +
                               std::to_string((vi >= kDegenerateVariance ? j : i) + 1) +
                               " has zero variance");
  const double h_rij = residual_entropy(xi, xj, mi, mj, vj, cij, i, j);
  const double h_rji = residual_entropy(xj, xi, mj, mi, vi, cij, j, i);
  return (hj + h_rij) - (hi + h_rji);
}

}  // namespace detail

/// Approximate differential entropy of a standardized sample (log-cosh and
/// Gaussian-weighted odd moment correction). Never exceeds the Gaussian
/// entropy (1 + log 2 pi) / 2.
inline double approx_entropy(const Eigen::Ref<const Vector>& y) {
  detail::require<ParameterError>(y.size() > 0, "approx_entropy: empty vector");
  double lc = 0.0, g = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    lc += detail::log_cosh(y[k]);
    g += y[k] * std::exp(-0.5 * y[k] * y[k]);
  }
  const double n = static_cast<double>(y.size());
  return detail::entropy_from_moments(lc / n, g / n);
}

/// Least-squares residual of x_i regressed on x_j (both mean-centered).
inline Vector residualize(const Eigen::Ref<const Vector>& x_i, const Eigen::Ref<const Vector>& x_j) {
  detail::require<ParameterError>(x_i.size() == x_j.size(), "residualize: length mismatch");
  detail::require<ParameterError>(x_i.size() > 0, "residualize: empty input");
  const double var_j = stats::variance(x_j);
  if (!(var_j >= detail::kDegenerateVariance))
    throw DegenerateInputError("residualize: regressor has zero variance");
  const double slope = stats::covariance(x_i, x_j) / var_j;
  return (x_i.array() - x_i.mean()) - slope * (x_j.array() - x_j.mean());
}

/// C_ij = -H(x_i) - H(R_ji) + H(x_j) + H(R_ij) on standardized inputs, with
/// both residuals re-standardized. Positive when x_i looks exogenous relative
/// to x_j. Antisymmetric exactly.
inline double pairwise_measure(const Eigen::Ref<const Vector>& x_i, const Eigen::Ref<const Vector>& x_j) {
  detail::require<ParameterError>(x_i.size() == x_j.size() && x_i.size() > 0,
                                  "pairwise_measure: inputs must have equal nonzero length");
  return detail::pairwise_measure_cached(x_i, x_j, approx_entropy(x_i), approx_entropy(x_j), 0, 1);
}

// ---------------------------------------------------------------------------
// Root search

enum class RootFinder { Plain, Plus };

struct RootSearch {
  std::size_t root = 0;         // element of U
  std::size_t evaluations = 0;  // pairwise_measure calls
};

namespace detail {

// Lazily caches marginal entropies of the columns of a standardized matrix.
class MeasureOracle {
 public:
  MeasureOracle(const Matrix& data, const IndexList& active)
      : data_(data), active_(active), entropy_(active.size()) {}

  // C between active positions a and b.
  double operator()(std::size_t a, std::size_t b) {
    ++evaluations_;
    return pairwise_measure_cached(data_.col(col(a)), data_.col(col(b)), entropy(a), entropy(b),
                                   active_[a], active_[b]);
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  Eigen::Index col(std::size_t a) const { return static_cast<Eigen::Index>(active_[a]); }
  double entropy(std::size_t a) {
    if (!entropy_[a]) entropy_[a] = approx_entropy(data_.col(col(a)));
    return *entropy_[a];
  }

  const Matrix& data_;
  const IndexList& active_;
  std::vector<std::optional<double>> entropy_;
  std::size_t evaluations_ = 0;
};

inline void validate_search(const Matrix& data, const IndexList& active) {
  detail::require<ParameterError>(!active.empty(), "root search: empty active set");
  for (std::size_t k = 0; k < active.size(); ++k) {
    detail::require<ParameterError>(active[k] < static_cast<std::size_t>(data.cols()),
                                    "root search: index out of range");
    detail::require<ParameterError>(k == 0 || active[k - 1] < active[k],
                                    "root search: active set must be strictly ascending");
  }
}

inline double neg_part_sq(double c) {
  const double m = std::min(0.0, c);
  return m * m;
}

}  // namespace detail

/// Exhaustive search: accumulates min(0, C_ij)^2 over all unordered pairs of
/// `active` and returns the element with the smallest total (smallest index
/// on ties). `data` columns listed in `active` must be standardized.
inline RootSearch find_root(const Matrix& data, const IndexList& active) {
  detail::validate_search(data, active);
  const std::size_t m = active.size();
  if (m == 1) return {active.front(), 0};
  detail::MeasureOracle measure(data, active);
  std::vector<double> score(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double c = measure(i, j);
      score[i] += detail::neg_part_sq(c);
      score[j] += detail::neg_part_sq(-c);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(score.begin(), score.end()) - score.begin());
  return {active[best], measure.evaluations()};
}

/// Lazy search returning the same root as find_root. Only the current
/// minimizers advance their opponent cursors; the search stops once the
/// smallest-index minimizer has been compared against every opponent, since
/// partial scores only grow.
inline RootSearch find_root_plus(const Matrix& data, const IndexList& active) {
  detail::validate_search(data, active);
  const std::size_t m = active.size();
  if (m == 1) return {active.front(), 0};
  detail::MeasureOracle measure(data, active);
  std::vector<double> score(m, 0.0);
  std::vector<std::size_t> cursor(m, 0);
  std::vector<char> pending(m * m, 1);  // not yet compared
  std::vector<std::size_t> minimizers;
  minimizers.reserve(m);

  for (;;) {
    const double lo = *std::min_element(score.begin(), score.end());
    minimizers.clear();
    for (std::size_t i = 0; i < m; ++i)
      if (score[i] == lo) minimizers.push_back(i);
    if (cursor[minimizers.front()] >= m) return {active[minimizers.front()], measure.evaluations()};

    for (const std::size_t i : minimizers) {
      if (cursor[i] >= m) continue;
      const std::size_t j = cursor[i]++;
      if (j == i || !pending[i * m + j]) continue;
      const double c = measure(i, j);
      score[i] += detail::neg_part_sq(c);
      score[j] += detail::neg_part_sq(-c);
      pending[i * m + j] = 0;
      pending[j * m + i] = 0;
    }
  }
}

inline RootSearch find_root(const Matrix& data, const IndexList& active, RootFinder finder) {
  return finder == RootFinder::Plus ? find_root_plus(data, active) : find_root(data, active);
}

// ---------------------------------------------------------------------------
// Independence screen

/// Two-sided p-value of the Welch t-test comparing x between the two label
/// classes (point-biserial association test).
inline double independence_pvalue(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Labels>& d) {
  detail::require<ParameterError>(x.size() == d.size(), "independence_pvalue: length mismatch");
  const auto ones = (d.array() == 1).count();
  detail::require<ParameterError>(ones > 0 && ones < d.size(),
                                  "independence_pvalue: labels must contain both classes");
  const stats::WelchResult w = stats::welch(x, d);
  if (!(w.std_error > 0)) return w.mean_diff == 0.0 ? 1.0 : 0.0;
  return stats::two_sided_t_pvalue(w.t, w.df);
}

// ---------------------------------------------------------------------------
// Extraction

/// Recovered errors plus the linear map that produces them from raw rows.
struct ErrorExtraction {
  IndexList order;  // kept variables in causal order (K)
  Matrix unmixing;  // p x p, W; errors = standardized rows * W(:, K)
  Matrix errors;    // n x |K|
  StandardizationParams standardization;
  std::size_t measure_evaluations = 0;

  std::size_t p() const { return static_cast<std::size_t>(unmixing.rows()); }
  Matrix kept_unmixing() const {
    Matrix w(unmixing.rows(), static_cast<Eigen::Index>(order.size()));
    for (std::size_t c = 0; c < order.size(); ++c)
      w.col(static_cast<Eigen::Index>(c)) = unmixing.col(static_cast<Eigen::Index>(order[c]));
    return w;
  }
};

/// Optional label-driven ancestor screen (removes columns whose p-value
/// against the labels is >= alpha before every root search).
struct AncestorScreen {
  const Labels* labels = nullptr;
  double alpha = 0.2;
};

namespace detail {

inline ErrorExtraction extract_errors(const Matrix& data, RootFinder finder,
                                      std::optional<AncestorScreen> screen) {
  detail::require<ParameterError>(data.rows() >= 2, "extraction: need at least two rows");
  detail::require<ParameterError>(data.cols() >= 1, "extraction: need at least one column");
  if (screen) {
    detail::require<ParameterError>(screen->labels != nullptr &&
                                        screen->labels->size() == data.rows(),
                                    "extraction: label length must equal row count");
    detail::require<ParameterError>(screen->alpha > 0.0 && screen->alpha <= 1.0,
                                    "extraction: alpha must lie in (0, 1]");
  }
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();

  ErrorExtraction ex;
  ex.standardization = fit_standardization(data);
  const Matrix z = apply_standardize(data, ex.standardization);
  Matrix work = z;
  ex.unmixing = Matrix::Identity(p, p);

  IndexList active(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;

  Matrix scaled(n, p);
  while (!active.empty()) {
    if (screen) {
      std::erase_if(active, [&](std::size_t i) {
        return independence_pvalue(work.col(static_cast<Eigen::Index>(i)), *screen->labels) >=
               screen->alpha;
      });
      if (active.empty()) break;
    }

    for (const std::size_t i : active) {
      const auto c = static_cast<Eigen::Index>(i);
      const double m = work.col(c).mean();
      const double v = (work.col(c).array() - m).square().mean();
      if (!(v >= kDegenerateVariance))
        throw DegenerateInputError("extraction: variable " + std::to_string(i + 1) +
                                   " became collinear with earlier variables");
      scaled.col(c) = (work.col(c).array() - m) / std::sqrt(v);
    }
    const RootSearch found = find_root(scaled, active, finder);
    ex.measure_evaluations += found.evaluations;
    const std::size_t g = found.root;
    ex.order.push_back(g);
    std::erase(active, g);

    const auto gc = static_cast<Eigen::Index>(g);
    const double mg = work.col(gc).mean();
    const double vg = (work.col(gc).array() - mg).square().mean();
    for (const std::size_t i : active) {
      const auto c = static_cast<Eigen::Index>(i);
      const double b =
          ((work.col(c).array() - work.col(c).mean()) * (work.col(gc).array() - mg)).mean() / vg;
      work.col(c) -= b * work.col(gc);
      ex.unmixing.col(c) -= b * ex.unmixing.col(gc);
    }
  }

  ex.errors = z * ex.kept_unmixing();
  return ex;
}

}  // namespace detail

/// Causal order over all p variables and their recovered errors.
inline ErrorExtraction direct_lingam(const Matrix& data, RootFinder finder = RootFinder::Plus) {
  return detail::extract_errors(data, finder, std::nullopt);
}

/// Recovers only the errors of variables that remain associated with the
/// labels; uses the lazy root search. An empty kept set is a valid result.
inline ErrorExtraction local_plus(const Matrix& data, const Labels& labels, double alpha = 0.2) {
  const auto ones = (labels.array() == 1).count();
  detail::require<ParameterError>(ones > 0 && ones < labels.size(),
                                  "local_plus: labels must contain both classes");
  return detail::extract_errors(data, RootFinder::Plus, AncestorScreen{&labels, alpha});
}

/// The four extraction variants compared in the ablation.
enum class ExtractionVariant { Original, Plus, Local, LocalPlus };

inline std::string_view to_string(ExtractionVariant v) {
  switch (v) {
    case ExtractionVariant::Original: return "original";
    case ExtractionVariant::Plus: return "plus";
    case ExtractionVariant::Local: return "local";
    case ExtractionVariant::LocalPlus: return "local_plus";
  }
  return "?";
}

inline ErrorExtraction extract(const Matrix& data, const Labels& labels, ExtractionVariant variant,
                               double alpha = 0.2) {
  switch (variant) {
    case ExtractionVariant::Original: return direct_lingam(data, RootFinder::Plain);
    case ExtractionVariant::Plus: return direct_lingam(data, RootFinder::Plus);
    case ExtractionVariant::Local:
      return detail::extract_errors(data, RootFinder::Plain, AncestorScreen{&labels, alpha});
    case ExtractionVariant::LocalPlus: return local_plus(data, labels, alpha);
  }
  throw ParameterError("extract: unknown variant");
}

/// Errors of new rows under a stored extraction, columns in causal order.
inline Matrix apply_extraction(const ErrorExtraction& extraction, const Matrix& new_data) {
  detail::require<ParameterError>(new_data.cols() == static_cast<Eigen::Index>(extraction.p()),
                                  "apply_extraction: column count does not match the extraction");
  return apply_standardize(new_data, extraction.standardization) * extraction.kept_unmixing();
}

}  // namespace rci
