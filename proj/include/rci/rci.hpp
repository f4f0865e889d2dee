#pragma once

// Root causal inference: extract errors, regress the label on them, and
// score each sample's errors by their log-odds contribution e_i * delta_i.

#include "rci/errors.hpp"
#include "rci/lingam.hpp"
#include "rci/logistic.hpp"
#include "rci/types.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace rci {

enum class RciMode { Full, LocalPlus };

/// Per-sample scores for the errors in `kept` (columns of `errors_test`, in
/// that order); every other column of the p-wide output is zero.
inline ShapleyMatrix shapley_scores(const LogisticModel& model, const Matrix& errors_test,
                                    const IndexList& kept, std::size_t p) {
  detail::require<ParameterError>(errors_test.cols() == static_cast<Eigen::Index>(kept.size()) &&
                                      model.delta.size() == static_cast<Eigen::Index>(kept.size()),
                                  "shapley_scores: column count must match the kept set");
  ShapleyMatrix s;
  s.scores = Matrix::Zero(errors_test.rows(), static_cast<Eigen::Index>(p));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    detail::require<ParameterError>(kept[c] < p, "shapley_scores: kept index out of range");
    const auto ci = static_cast<Eigen::Index>(c);
    s.scores.col(static_cast<Eigen::Index>(kept[c])) = errors_test.col(ci) * model.delta[ci];
  }
  s.sample_ids = sequential_ids(static_cast<std::size_t>(errors_test.rows()));
  return s;
}

struct RciResult {
  ShapleyMatrix shapley;
  ErrorExtraction extraction;
  LogisticModel model;
  double extraction_seconds = 0.0;  // monotonic clock around the extraction only
};

namespace detail {

inline RciResult run_rci_impl(const Matrix& train, const Labels& labels, const Matrix* test,
                              double alpha, RciMode mode) {
  require<ParameterError>(train.rows() == labels.size(), "run_rci: label length must equal row count");
  require<ParameterError>(test == nullptr || test->cols() == train.cols(),
                          "run_rci: train and test must have the same columns");
  require_both_classes(labels, "run_rci");

  RciResult out;
  const auto start = std::chrono::steady_clock::now();
  out.extraction = mode == RciMode::Full ? direct_lingam(train, RootFinder::Plus)
                                         : local_plus(train, labels, alpha);
  out.extraction_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto p = static_cast<std::size_t>(train.cols());
  const Matrix& errors_test = test ? apply_extraction(out.extraction, *test) : out.extraction.errors;
  out.model = fit_logistic(out.extraction.errors, labels);
  out.shapley = shapley_scores(out.model, errors_test, out.extraction.order, p);
  out.shapley.empty_kept_warning = out.extraction.order.empty();
  return out;
}

}  // namespace detail

/// Scores the training samples themselves.
inline RciResult run_rci(const Matrix& train, const Labels& labels, double alpha = 0.2,
                         RciMode mode = RciMode::LocalPlus) {
  return detail::run_rci_impl(train, labels, nullptr, alpha, mode);
}

/// Scores held-out samples with the extraction and model fitted on `train`.
inline RciResult run_rci(const Matrix& train, const Labels& labels, const Matrix& test,
                         double alpha = 0.2, RciMode mode = RciMode::LocalPlus) {
  return detail::run_rci_impl(train, labels, &test, alpha, mode);
}

/// Variables by descending score, ascending index on ties.
inline Ranking rank_row(const Eigen::Ref<const Vector>& scores) {
  detail::require<ParameterError>(scores.allFinite(), "rank_row: scores must be finite");
  Ranking r;
  r.order.resize(static_cast<std::size_t>(scores.size()));
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  r.root_cause_count = static_cast<std::size_t>((scores.array() > 0.0).count());
  return r;
}

inline std::vector<Ranking> rank_rows(const Matrix& scores) {
  std::vector<Ranking> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index k = 0; k < scores.rows(); ++k) out.push_back(rank_row(scores.row(k).transpose()));
  return out;
}

}  // namespace rci
