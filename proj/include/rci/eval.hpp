#pragma once

// Ranking metrics against known per-sample Shapley values.

#include "rci/errors.hpp"
#include "rci/types.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace rci {

/// True root causes of one sample: strictly positive Shapley values, sorted
/// descending, with weights normalized to sum to one.
struct GroundTruthRanking {
  IndexList order;
  std::vector<double> weights;
  std::size_t q() const { return order.size(); }
};

inline GroundTruthRanking ground_truth_row(const Eigen::Ref<const Vector>& s) {
  GroundTruthRanking g;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 0.0) g.order.push_back(static_cast<std::size_t>(i));
  std::stable_sort(g.order.begin(), g.order.end(), [&](std::size_t a, std::size_t b) {
    return s[static_cast<Eigen::Index>(a)] > s[static_cast<Eigen::Index>(b)];
  });
  double total = 0.0;
  for (std::size_t i : g.order) total += s[static_cast<Eigen::Index>(i)];
  g.weights.reserve(g.order.size());
  for (std::size_t i : g.order) g.weights.push_back(s[static_cast<Eigen::Index>(i)] / total);
  return g;
}

inline std::vector<GroundTruthRanking> ground_truth_ranking(const ShapleyMatrix& truth) {
  std::vector<GroundTruthRanking> out;
  out.reserve(static_cast<std::size_t>(truth.scores.rows()));
  for (Eigen::Index k = 0; k < truth.scores.rows(); ++k)
    out.push_back(ground_truth_row(truth.scores.row(k).transpose()));
  return out;
}

namespace detail {

// Sum over depths i = 1..q of weight_i * |est[0:i] ∩ truth[0:i]| / i.
template <typename WeightFn>
double rbo_row(const IndexList& estimated, const GroundTruthRanking& truth, WeightFn weight) {
  const std::size_t q = truth.q();
  require<ParameterError>(estimated.size() >= q, "rbo: estimated ranking shorter than truth");
  std::size_t universe = 0;
  for (std::size_t v : estimated) universe = std::max(universe, v + 1);
  for (std::size_t v : truth.order) universe = std::max(universe, v + 1);
  std::vector<char> in_est(universe, 0), in_true(universe, 0);
  std::size_t overlap = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t e = estimated[i];
    const std::size_t t = truth.order[i];
    in_est[e] = 1;
    if (in_true[e]) ++overlap;
    in_true[t] = 1;
    if (in_est[t]) ++overlap;
    total += weight(i) * static_cast<double>(overlap) / static_cast<double>(i + 1);
  }
  return total;
}

template <typename WeightFn>
double rbo_mean(const std::vector<Ranking>& estimated, const std::vector<GroundTruthRanking>& truth,
                WeightFn weight_for) {
  require<ParameterError>(estimated.size() == truth.size(), "rbo: sample counts differ");
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k].q() == 0) continue;
    sum += rbo_row(estimated[k].order, truth[k],
                   [&](std::size_t i) { return weight_for(truth[k], i); });
    ++counted;
  }
  if (counted == 0) throw UndefinedMetricError("rbo: no sample has a true root cause");
  return sum / static_cast<double>(counted);
}

}  // namespace detail

/// Shapley-weighted rank-biased overlap, averaged over samples with at least
/// one true root cause.
inline double rbo_weighted(const std::vector<Ranking>& estimated,
                           const std::vector<GroundTruthRanking>& truth) {
  return detail::rbo_mean(estimated, truth,
                          [](const GroundTruthRanking& g, std::size_t i) { return g.weights[i]; });
}

/// Same overlap with uniform weights 1/q.
inline double rbo_unweighted(const std::vector<Ranking>& estimated,
                             const std::vector<GroundTruthRanking>& truth) {
  return detail::rbo_mean(estimated, truth, [](const GroundTruthRanking& g, std::size_t) {
    return 1.0 / static_cast<double>(g.q());
  });
}

/// Mean squared difference over all entries.
inline double mse_scores(const Matrix& estimated, const Matrix& truth) {
  detail::require<ParameterError>(estimated.rows() == truth.rows() && estimated.cols() == truth.cols(),
                                  "mse_scores: shape mismatch");
  detail::require<ParameterError>(estimated.size() > 0, "mse_scores: empty input");
  return (estimated - truth).squaredNorm() / static_cast<double>(estimated.size());
}

inline double mse_scores(const ShapleyMatrix& estimated, const ShapleyMatrix& truth) {
  return mse_scores(estimated.scores, truth.scores);
}

}  // namespace rci
