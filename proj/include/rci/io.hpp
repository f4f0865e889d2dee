#pragma once

// CSV and JSON persistence for cohorts, models, extractions and scores.

#include "rci/errors.hpp"
#include "rci/lingam.hpp"
#include "rci/logistic.hpp"
#include "rci/sem.hpp"
#include "rci/types.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rci::io {

using nlohmann::json;

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line, std::size_t col) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": cannot parse '" + std::string(s) + "' as a number");
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  if (line.empty()) throw InputError("csv: missing header row");
  for (auto f : split_commas(line)) {
    std::string name(f);
    while (!name.empty() && name.front() == ' ') name.erase(name.begin());
    while (!name.empty() && name.back() == ' ') name.pop_back();
    t.header.push_back(name);
  }
  const std::size_t p = t.header.size();
  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != p)
      throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(p) +
                       " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < p; ++c) flat.push_back(parse_double(fields[c], lineno, c + 1));
    ++rows;
  }
  t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < p; ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * p + c];
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in);
}

struct LabelledData {
  DataMatrix data;
  Labels labels;
};

/// Splits a table into features and a binary label column.
inline LabelledData split_label(const CsvTable& t, const std::string& label_col) {
  std::size_t li = t.header.size();
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c] == label_col) li = c;
  if (li == t.header.size()) throw InputError("label column '" + label_col + "' not found");
  if (t.values.rows() == 0) throw InputError("no data rows");

  LabelledData out;
  const Eigen::Index n = t.values.rows();
  out.labels.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = t.values(k, static_cast<Eigen::Index>(li));
    if (v != 0.0 && v != 1.0)
      throw InputError("label column '" + label_col + "' row " + std::to_string(k + 1) +
                       " is not 0 or 1");
    out.labels[k] = v == 1.0 ? 1 : 0;
  }
  const auto ones = (out.labels.array() == 1).count();
  if (ones == 0 || ones == n)
    throw InputError("label column '" + label_col + "' contains a single class");

  out.data.values.resize(n, t.values.cols() - 1);
  Eigen::Index dst = 0;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == li) continue;
    out.data.values.col(dst++) = t.values.col(static_cast<Eigen::Index>(c));
    out.data.names.push_back(t.header[c]);
  }
  return out;
}

inline void ensure_parent(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// Header `names...,label_name`, one sample per row.
inline std::string cohort_csv(const Matrix& data, const Labels& labels,
                              const std::vector<std::string>& names, const std::string& label_name = "D") {
  std::string s;
  for (const auto& n : names) s += n + ",";
  s += label_name + "\n";
  for (Eigen::Index k = 0; k < data.rows(); ++k) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      s += format_double(data(k, j));
      s += ',';
    }
    s += labels[k] == 1 ? "1\n" : "0\n";
  }
  return s;
}

/// `sample_id,S_<name>...`, one row per sample.
inline std::string scores_csv(const Matrix& scores, const std::vector<std::string>& sample_ids,
                              const std::vector<std::string>& names) {
  std::string s = "sample_id";
  for (const auto& n : names) s += ",S_" + n;
  s += '\n';
  for (Eigen::Index k = 0; k < scores.rows(); ++k) {
    s += sample_ids[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      s += ',';
      s += format_double(scores(k, j));
    }
    s += '\n';
  }
  return s;
}

// JSON ----------------------------------------------------------------------

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
  return rows;
}

inline Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

inline Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& r = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(r.size()) != cols) throw InputError("json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline json sem_to_json(const GroundTruthSem& sem) {
  json dists = json::array();
  for (ErrorDist d : sem.error_dists) dists.push_back(std::string(to_string(d)));
  return json{{"theta", to_json(sem.theta)},
              {"beta", to_json(sem.beta)},
              {"alpha", sem.alpha},
              {"error_dists", dists},
              {"seed", sem.seed}};
}

inline GroundTruthSem sem_from_json(const json& j) {
  try {
    GroundTruthSem sem;
    sem.theta = matrix_from_json(j.at("theta"));
    sem.beta = vector_from_json(j.at("beta"));
    sem.alpha = j.at("alpha").get<double>();
    for (const auto& d : j.at("error_dists")) {
      const auto parsed = parse_error_dist(d.get<std::string>());
      if (!parsed) throw InputError("sem json: unknown error distribution '" + d.get<std::string>() + "'");
      sem.error_dists.push_back(*parsed);
    }
    sem.seed = j.at("seed").get<std::uint64_t>();
    return sem;
  } catch (const json::exception& e) {
    throw InputError(std::string("sem json: ") + e.what());
  }
}

/// {order, unmixing (row-major), means, stddevs}
inline json extraction_to_json(const ErrorExtraction& ex) {
  return json{{"order", ex.order},
              {"unmixing", to_json(ex.unmixing)},
              {"means", to_json(ex.standardization.means)},
              {"stddevs", to_json(ex.standardization.stddevs)}};
}

/// Restores everything except the training errors.
inline ErrorExtraction extraction_from_json(const json& j) {
  try {
    ErrorExtraction ex;
    ex.order = j.at("order").get<IndexList>();
    ex.unmixing = matrix_from_json(j.at("unmixing"));
    ex.standardization.means = vector_from_json(j.at("means"));
    ex.standardization.stddevs = vector_from_json(j.at("stddevs"));
    return ex;
  } catch (const json::exception& e) {
    throw InputError(std::string("extraction json: ") + e.what());
  }
}

/// {delta, intercept, kept_indices}
inline json model_to_json(const LogisticModel& m, const IndexList& kept) {
  return json{{"delta", to_json(m.delta)},
              {"intercept", m.intercept},
              {"kept_indices", kept},
              {"converged", m.converged},
              {"iterations", m.iterations}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace rci::io
