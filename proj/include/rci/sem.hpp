#pragma once

// Random linear non-Gaussian SEMs with a logistic terminal label, cohort
// sampling, and the exact per-sample Shapley values of the generating model.

#include "rci/errors.hpp"
#include "rci/rng.hpp"
#include "rci/stats.hpp"
#include "rci/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rci {

enum class ErrorDist { StudentT5, ChiSq3, UniformSym };

inline constexpr std::array<ErrorDist, 3> kErrorDists = {ErrorDist::StudentT5, ErrorDist::ChiSq3,
                                                         ErrorDist::UniformSym};

inline std::string_view to_string(ErrorDist d) {
  switch (d) {
    case ErrorDist::StudentT5: return "StudentT5";
    case ErrorDist::ChiSq3: return "ChiSq3";
    case ErrorDist::UniformSym: return "UniformSym";
  }
  return "?";
}

inline std::optional<ErrorDist> parse_error_dist(std::string_view s) {
  for (ErrorDist d : kErrorDists)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

/// Population variance of each centered error distribution.
inline double error_variance(ErrorDist d) {
  switch (d) {
    case ErrorDist::StudentT5: return 5.0 / 3.0;
    case ErrorDist::ChiSq3: return 6.0;
    case ErrorDist::UniformSym: return 1.0 / 3.0;
  }
  return 0.0;
}

/// Generating model. Row-vector convention: X = X * theta + E, so
/// theta(i, j) != 0 means an edge X_i -> X_j and theta is strictly upper
/// triangular.
struct GroundTruthSem {
  Matrix theta;
  Vector beta;
  double alpha = 0.0;
  std::vector<ErrorDist> error_dists;
  std::uint64_t seed = 0;

  std::size_t p() const { return static_cast<std::size_t>(theta.rows()); }
};

struct SampledCohort {
  Matrix errors;
  Matrix data;
  Labels labels;
};

namespace detail {

inline double edge_weight(Engine& rng) {
  std::uniform_real_distribution<double> mag(0.25, 1.0);
  std::bernoulli_distribution sign(0.5);
  const double m = mag(rng);
  return sign(rng) ? m : -m;
}

}  // namespace detail

/// (I - theta)^{-1}. Upper triangular with unit diagonal for a valid SEM.
inline Matrix mixing_matrix(const Matrix& theta) {
  const Eigen::Index p = theta.rows();
  const Matrix i_minus = Matrix::Identity(p, p) - theta;
  return i_minus.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
}

/// True log-odds coefficients of D on the errors: delta = (I - theta)^{-1} beta.
inline Vector error_coefficients(const GroundTruthSem& sem) { return mixing_matrix(sem.theta) * sem.beta; }

/// Random DAG over p variables (index order is topological) plus label
/// coefficients drawn with the same sparsity and magnitude scheme.
inline GroundTruthSem generate_sem(std::size_t p, double expected_neighbors, std::uint64_t seed) {
  detail::require<ParameterError>(p >= 2, "generate_sem: p must be >= 2");
  detail::require<ParameterError>(
      expected_neighbors > 0 && expected_neighbors <= static_cast<double>(p - 1),
      "generate_sem: expected_neighbors must lie in (0, p-1]");

  Engine rng = make_engine(seed);
  const double edge_prob = expected_neighbors / static_cast<double>(p - 1);
  std::bernoulli_distribution edge(edge_prob);

  GroundTruthSem sem;
  sem.seed = seed;
  const auto ip = static_cast<Eigen::Index>(p);
  sem.theta = Matrix::Zero(ip, ip);
  for (Eigen::Index i = 0; i < ip; ++i)
    for (Eigen::Index j = i + 1; j < ip; ++j)
      if (edge(rng)) sem.theta(i, j) = detail::edge_weight(rng);

  sem.beta = Vector::Zero(ip);
  while (sem.beta.isZero(0.0)) {
    for (Eigen::Index i = 0; i < ip; ++i)
      sem.beta[i] = edge(rng) ? detail::edge_weight(rng) : 0.0;
  }
  sem.alpha = 0.0;

  std::uniform_int_distribution<int> pick(0, static_cast<int>(kErrorDists.size()) - 1);
  sem.error_dists.reserve(p);
  for (std::size_t i = 0; i < p; ++i) sem.error_dists.push_back(kErrorDists[pick(rng)]);
  return sem;
}

/// Draws n centered error rows, propagates them through the triangular
/// system, and draws labels from logistic(X beta + alpha).
inline SampledCohort sample_cohort(const GroundTruthSem& sem, std::size_t n, std::uint64_t seed) {
  const auto p = static_cast<Eigen::Index>(sem.p());
  detail::require<ParameterError>(n >= 1, "sample_cohort: n must be >= 1");
  detail::require<ParameterError>(sem.theta.cols() == p && sem.beta.size() == p &&
                                      static_cast<Eigen::Index>(sem.error_dists.size()) == p,
                                  "sample_cohort: inconsistent model dimensions");
  const auto in = static_cast<Eigen::Index>(n);
  Engine rng = make_engine(seed);

  SampledCohort out;
  out.errors.resize(in, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    auto col = out.errors.col(j);
    switch (sem.error_dists[static_cast<std::size_t>(j)]) {
      case ErrorDist::StudentT5: {
        std::student_t_distribution<double> dist(5.0);
        for (Eigen::Index k = 0; k < in; ++k) col[k] = dist(rng);
        break;
      }
      case ErrorDist::ChiSq3: {
        std::chi_squared_distribution<double> dist(3.0);
        for (Eigen::Index k = 0; k < in; ++k) col[k] = dist(rng) - 3.0;
        break;
      }
      case ErrorDist::UniformSym: {
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (Eigen::Index k = 0; k < in; ++k) col[k] = dist(rng);
        break;
      }
    }
  }

  // Forward substitution in index order.
  out.data = out.errors;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (sem.theta(i, j) != 0.0) out.data.col(j) += sem.theta(i, j) * out.data.col(i);

  out.labels.resize(in);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vector logit = (out.data * sem.beta).array() + sem.alpha;
  for (Eigen::Index k = 0; k < in; ++k) out.labels[k] = u(rng) < stats::logistic(logit[k]) ? 1 : 0;
  return out;
}

/// Exact per-sample Shapley values s_i^k = e_i^k * delta_i of the generating
/// model.
inline ShapleyMatrix true_shapley(const GroundTruthSem& sem, const Matrix& errors) {
  detail::require<ParameterError>(errors.cols() == static_cast<Eigen::Index>(sem.p()),
                                  "true_shapley: errors column count must equal p");
  const Vector delta = error_coefficients(sem);
  ShapleyMatrix s;
  s.scores = errors * delta.asDiagonal();
  s.sample_ids = sequential_ids(static_cast<std::size_t>(errors.rows()));
  return s;
}

/// Variables with a directed path into the label (structural, ignores
/// coefficient cancellation). Ascending.
inline IndexList label_ancestors(const GroundTruthSem& sem) {
  const auto p = static_cast<Eigen::Index>(sem.p());
  std::vector<bool> anc(static_cast<std::size_t>(p), false);
  // Reverse index order is a reverse topological order.
  for (Eigen::Index i = p - 1; i >= 0; --i) {
    bool a = sem.beta[i] != 0.0;
    for (Eigen::Index j = i + 1; j < p && !a; ++j)
      a = sem.theta(i, j) != 0.0 && anc[static_cast<std::size_t>(j)];
    anc[static_cast<std::size_t>(i)] = a;
  }
  IndexList out;
  for (Eigen::Index i = 0; i < p; ++i)
    if (anc[static_cast<std::size_t>(i)]) out.push_back(static_cast<std::size_t>(i));
  return out;
}

}  // namespace rci
