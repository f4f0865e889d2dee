#pragma once

// Seeded synthetic benchmark: simulate, score with every method, evaluate
// against the generating model, and time the four extraction variants.

#include "rci/baselines.hpp"
#include "rci/errors.hpp"
#include "rci/eval.hpp"
#include "rci/io.hpp"
#include "rci/lingam.hpp"
#include "rci/rci.hpp"
#include "rci/rng.hpp"
#include "rci/sem.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace rci::bench {

enum class Method { RciFull, RciLocalPlus, TT, LR, CO };

inline constexpr std::array<Method, 5> kAllMethods = {Method::RciLocalPlus, Method::RciFull, Method::TT,
                                                      Method::LR, Method::CO};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::RciFull: return "rci_full";
    case Method::RciLocalPlus: return "rci_local_plus";
    case Method::TT: return "tt";
    case Method::LR: return "lr";
    case Method::CO: return "co";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// Whether the method's scores are on the log-odds scale (MSE is reported).
inline bool reports_mse(Method m) {
  return m == Method::RciFull || m == Method::RciLocalPlus || m == Method::LR;
}

inline constexpr std::array<ExtractionVariant, 4> kVariants = {
    ExtractionVariant::LocalPlus, ExtractionVariant::Local, ExtractionVariant::Plus,
    ExtractionVariant::Original};

struct Config {
  std::size_t n = 1000;
  std::size_t p = 10;
  double expected_neighbors = 2.0;
  std::size_t replications = 100;
  double alpha = 0.2;
  std::vector<Method> methods{Method::RciLocalPlus};
  std::uint64_t seed = 1;
  double test_fraction = 0.0;  // 0: score the training samples
  std::size_t workers = 1;
  bool timing = true;
  bool ablation = true;

  void validate() const {
    detail::require<ParameterError>(p >= 2, "p must be >= 2");
    detail::require<ParameterError>(n >= 2, "n must be >= 2");
    detail::require<ParameterError>(replications >= 1, "reps must be >= 1");
    detail::require<ParameterError>(expected_neighbors > 0 &&
                                        expected_neighbors <= static_cast<double>(p - 1),
                                    "en must lie in (0, p-1]");
    detail::require<ParameterError>(alpha > 0 && alpha <= 1, "alpha must lie in (0, 1]");
    detail::require<ParameterError>(test_fraction >= 0 && test_fraction < 1,
                                    "test-frac must lie in [0, 1)");
    detail::require<ParameterError>(workers >= 1, "workers must be >= 1");
    detail::require<ParameterError>(!methods.empty(), "at least one method is required");
    if (test_fraction > 0) {
      const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
      detail::require<ParameterError>(n_test >= 1 && n - n_test >= 2,
                                      "test-frac leaves an empty train or test set");
    }
  }
};

/// One simulated dataset and its train/test partition (contiguous rows; the
/// rows are exchangeable so the last rows form the test set).
struct Replication {
  std::size_t index = 0;
  GroundTruthSem sem;
  SampledCohort cohort;
  Eigen::Index n_train = 0;

  Matrix train() const { return cohort.data.topRows(n_train); }
  Labels train_labels() const { return cohort.labels.head(n_train); }
  bool held_out() const { return n_train < cohort.data.rows(); }
  Matrix test() const { return cohort.data.bottomRows(cohort.data.rows() - n_train); }
  Matrix test_errors() const {
    return held_out() ? Matrix(cohort.errors.bottomRows(cohort.errors.rows() - n_train))
                      : Matrix(cohort.errors.topRows(n_train));
  }
};

inline Replication make_replication(const Config& cfg, std::size_t r) {
  Replication rep;
  rep.index = r;
  rep.sem = generate_sem(cfg.p, cfg.expected_neighbors, derive_seed(cfg.seed, r, StreamPurpose::Structure));
  rep.cohort = sample_cohort(rep.sem, cfg.n, derive_seed(cfg.seed, r, StreamPurpose::Sample));
  const auto n_test = cfg.test_fraction > 0
                          ? std::llround(static_cast<double>(cfg.n) * cfg.test_fraction)
                          : 0LL;
  rep.n_train = static_cast<Eigen::Index>(cfg.n) - static_cast<Eigen::Index>(n_test);
  return rep;
}

/// Scores for the evaluation rows of a replication, plus the time spent.
struct MethodOutput {
  Matrix scores;
  double seconds = 0.0;
};

inline MethodOutput run_method(Method m, const Replication& rep, double alpha) {
  const Matrix train = rep.train();
  const Labels labels = rep.train_labels();
  const Matrix test = rep.held_out() ? rep.test() : Matrix();
  const Matrix* test_ptr = rep.held_out() ? &test : nullptr;
  MethodOutput out;
  if (m == Method::RciFull || m == Method::RciLocalPlus) {
    const RciMode mode = m == Method::RciFull ? RciMode::Full : RciMode::LocalPlus;
    RciResult r = test_ptr ? run_rci(train, labels, test, alpha, mode) : run_rci(train, labels, alpha, mode);
    out.scores = std::move(r.shapley.scores);
    out.seconds = r.extraction_seconds;
    return out;
  }
  const BaselineMethod b = m == Method::TT ? BaselineMethod::TT
                           : m == Method::LR ? BaselineMethod::LR
                                             : BaselineMethod::CO;
  const auto start = std::chrono::steady_clock::now();
  out.scores = baseline_scores(b, train, labels, alpha, test_ptr).scores;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// One row of the metric report.
struct MetricRow {
  Method method = Method::RciLocalPlus;
  std::size_t replication = 0;
  double rbo_weighted = 0.0;
  double rbo_unweighted = 0.0;
  std::optional<double> mse;
  std::optional<double> seconds;
};

struct AblationRow {
  std::size_t replication = 0;
  std::array<double, 4> seconds{};
  std::array<std::size_t, 4> evaluations{};
  std::array<std::size_t, 4> kept{};
};

struct ReplicationResult {
  std::vector<MetricRow> metrics;
  std::optional<AblationRow> ablation;
};

inline ReplicationResult run_replication(const Config& cfg, std::size_t r) {
  const Replication rep = make_replication(cfg, r);
  const ShapleyMatrix truth = true_shapley(rep.sem, rep.test_errors());
  const auto truth_rank = ground_truth_ranking(truth);

  ReplicationResult out;
  for (Method m : cfg.methods) {
    const MethodOutput mo = run_method(m, rep, cfg.alpha);
    const auto est = rank_rows(mo.scores);
    MetricRow row;
    row.method = m;
    row.replication = r;
    row.rbo_weighted = rbo_weighted(est, truth_rank);
    row.rbo_unweighted = rbo_unweighted(est, truth_rank);
    if (reports_mse(m)) row.mse = mse_scores(mo.scores, truth.scores);
    if (cfg.timing) row.seconds = mo.seconds;
    out.metrics.push_back(row);
  }

  if (cfg.ablation) {
    AblationRow ab;
    ab.replication = r;
    const Matrix train = rep.train();
    const Labels labels = rep.train_labels();
    for (std::size_t v = 0; v < kVariants.size(); ++v) {
      const auto start = std::chrono::steady_clock::now();
      const ErrorExtraction ex = extract(train, labels, kVariants[v], cfg.alpha);
      ab.seconds[v] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ab.evaluations[v] = ex.measure_evaluations;
      ab.kept[v] = ex.order.size();
    }
    out.ablation = ab;
  }
  return out;
}

/// Runs every replication, in parallel across `cfg.workers` threads. Results
/// are ordered by replication index regardless of scheduling.
inline std::vector<ReplicationResult> run_all(const Config& cfg) {
  cfg.validate();
  std::vector<ReplicationResult> results(cfg.replications);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t workers = std::min(cfg.workers, cfg.replications);
  auto work = [&](std::size_t w) {
    for (std::size_t r = w; r < cfg.replications; r += workers) {
      try {
        results[r] = run_replication(cfg, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// Mean with a 95% normal-approximation confidence interval.
struct Summary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t count = 0;
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  const double half = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

/// Per-replication values of one metric for one method.
template <typename Getter>
std::vector<double> collect(const std::vector<ReplicationResult>& results, Method m, Getter get) {
  std::vector<double> xs;
  for (const auto& r : results)
    for (const auto& row : r.metrics)
      if (row.method == m) {
        const std::optional<double> v = get(row);
        if (v) xs.push_back(*v);
      }
  return xs;
}

inline io::json optional_json(const std::optional<double>& v) { return v ? io::json(*v) : io::json(nullptr); }

inline io::json summary_json(const Summary& s) {
  return io::json{{"mean", s.mean}, {"ci95_low", s.ci_low}, {"ci95_high", s.ci_high}, {"count", s.count}};
}

/// Full benchmark report: configuration, per-replication rows and the
/// aggregates recomputable from them.
inline io::json report_json(const Config& cfg, const std::vector<ReplicationResult>& results) {
  using io::json;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(std::string(to_string(m)));
  json report;
  report["config"] = {{"n", cfg.n},
                      {"p", cfg.p},
                      {"en", cfg.expected_neighbors},
                      {"reps", cfg.replications},
                      {"alpha", cfg.alpha},
                      {"methods", methods},
                      {"seed", cfg.seed},
                      {"test_frac", cfg.test_fraction},
                      {"timing", cfg.timing},
                      {"ablation", cfg.ablation}};
  report["metadata"] = {
      {"rbo_samples", "all evaluation samples with at least one true root cause"},
      {"ttest", "welch"},
      {"ci", "mean +/- 1.96 * sd / sqrt(reps)"},
      {"timing", "steady clock; RCI methods time the error extraction only, baselines the whole fit"},
      {"evaluation_rows", cfg.test_fraction > 0 ? "held-out tail rows" : "training rows"}};

  json rows = json::array();
  for (const auto& r : results)
    for (const auto& row : r.metrics)
      rows.push_back({{"method", std::string(to_string(row.method))},
                      {"n", cfg.n},
                      {"p", cfg.p},
                      {"replication", row.replication},
                      {"rbo_weighted", row.rbo_weighted},
                      {"rbo_unweighted", row.rbo_unweighted},
                      {"mse", optional_json(row.mse)},
                      {"wall_clock_seconds", optional_json(row.seconds)}});
  report["replications"] = rows;

  json summary = json::object();
  for (Method m : cfg.methods) {
    json s;
    s["rbo_weighted"] = summary_json(
        summarize(collect(results, m, [](const MetricRow& r) -> std::optional<double> { return r.rbo_weighted; })));
    s["rbo_unweighted"] = summary_json(
        summarize(collect(results, m, [](const MetricRow& r) -> std::optional<double> { return r.rbo_unweighted; })));
    s["mse"] = reports_mse(m) ? summary_json(summarize(collect(results, m, [](const MetricRow& r) { return r.mse; })))
                              : json(nullptr);
    s["wall_clock_seconds"] =
        cfg.timing ? summary_json(summarize(collect(results, m, [](const MetricRow& r) { return r.seconds; })))
                   : json(nullptr);
    summary[std::string(to_string(m))] = s;
  }
  report["summary"] = summary;

  if (cfg.ablation) {
    json ab;
    json ab_rows = json::array();
    std::array<std::vector<double>, 4> secs;
    std::array<std::vector<double>, 4> evals;
    for (const auto& r : results) {
      if (!r.ablation) continue;
      json row{{"replication", r.ablation->replication}};
      for (std::size_t v = 0; v < kVariants.size(); ++v) {
        json cell{{"measure_evaluations", r.ablation->evaluations[v]}, {"kept", r.ablation->kept[v]}};
        if (cfg.timing) cell["seconds"] = r.ablation->seconds[v];
        row[std::string(to_string(kVariants[v]))] = cell;
        secs[v].push_back(r.ablation->seconds[v]);
        evals[v].push_back(static_cast<double>(r.ablation->evaluations[v]));
      }
      ab_rows.push_back(row);
    }
    ab["replications"] = ab_rows;
    const double original_secs = summarize(secs[3]).mean;
    json variants = json::object();
    for (std::size_t v = 0; v < kVariants.size(); ++v) {
      json cell{{"measure_evaluations", summary_json(summarize(evals[v]))}};
      if (cfg.timing) {
        const Summary s = summarize(secs[v]);
        cell["seconds"] = summary_json(s);
        cell["speedup_vs_original"] = s.mean > 0 ? json(original_secs / s.mean) : json(nullptr);
      }
      variants[std::string(to_string(kVariants[v]))] = cell;
    }
    ab["summary"] = variants;
    report["ablation"] = ab;
  }
  return report;
}

}  // namespace rci::bench
