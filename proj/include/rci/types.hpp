#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace rci {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;
using IndexList = std::vector<std::size_t>;

/// n x p samples with optional column names.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> names;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

/// Default column names X1..Xp.
inline std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t i = 0; i < p; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

/// Per-sample Shapley scores. Columns outside the kept set are exactly zero.
struct ShapleyMatrix {
  Matrix scores;
  std::vector<std::string> sample_ids;
  // Set when no variable survived the ancestor screen; scores are all zero.
  bool empty_kept_warning = false;
};

/// Variables sorted by descending score, ascending index on ties.
struct Ranking {
  IndexList order;
  std::size_t root_cause_count = 0;
};

inline std::vector<std::string> sequential_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t k = 0; k < n; ++k) ids.push_back(std::to_string(k + 1));
  return ids;
}

}  // namespace rci
