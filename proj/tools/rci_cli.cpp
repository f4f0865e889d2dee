// rci: simulate cohorts, score root causes, and run the synthetic benchmark.

#include "rci/baselines.hpp"
#include "rci/benchmark.hpp"
#include "rci/errors.hpp"
#include "rci/io.hpp"
#include "rci/rci.hpp"
#include "rci/rng.hpp"
#include "rci/sem.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using rci::io::json;

namespace {

struct Options {
  std::size_t n = 1000;
  std::size_t p = 10;
  double en = 2.0;
  std::size_t reps = 1;
  double alpha = 0.2;
  std::string mode = "local_plus";
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
  std::string in;
  std::string out = "out";
  std::string label_col = "D";
  double test_frac = 0.0;
  std::size_t workers = 1;
  bool no_timing = false;
  bool no_ablation = false;
};

void require_param(bool ok, const std::string& msg) {
  if (!ok) throw rci::ParameterError(msg);
}

std::string rep_dir_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rep_%03zu", r);
  return buf;
}

std::vector<rci::bench::Method> resolve_methods(const Options& o, std::vector<rci::bench::Method> fallback) {
  require_param(o.mode == "full" || o.mode == "local_plus", "--mode must be 'full' or 'local_plus'");
  if (o.methods.empty()) return fallback;
  std::vector<rci::bench::Method> out;
  for (const auto& name : o.methods) {
    std::optional<rci::bench::Method> m;
    if (name == "rci")
      m = o.mode == "full" ? rci::bench::Method::RciFull : rci::bench::Method::RciLocalPlus;
    else
      m = rci::bench::parse_method(name);
    require_param(m.has_value(), "unknown method '" + name + "' (rci, rci_full, rci_local_plus, tt, lr, co)");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

void check_common(const Options& o) {
  require_param(o.n >= 2, "--n must be >= 2");
  require_param(o.p >= 2, "--p must be >= 2");
  require_param(o.reps >= 1, "--reps must be >= 1");
  require_param(o.en > 0 && o.en <= static_cast<double>(o.p - 1), "--en must lie in (0, p-1]");
  require_param(o.alpha > 0 && o.alpha <= 1, "--alpha must lie in (0, 1]");
  require_param(o.test_frac >= 0 && o.test_frac < 1, "--test-frac must lie in [0, 1)");
  require_param(o.workers >= 1, "--workers must be >= 1");
}

int cmd_simulate(const Options& o) {
  check_common(o);
  const fs::path root = fs::path(o.out) / ("seed_" + std::to_string(o.seed));
  for (std::size_t r = 0; r < o.reps; ++r) {
    const auto sem = rci::generate_sem(o.p, o.en, rci::derive_seed(o.seed, r, rci::StreamPurpose::Structure));
    const auto cohort = rci::sample_cohort(sem, o.n, rci::derive_seed(o.seed, r, rci::StreamPurpose::Sample));
    const fs::path dir = root / rep_dir_name(r);
    rci::io::write_text(dir / "cohort.csv",
                        rci::io::cohort_csv(cohort.data, cohort.labels, rci::default_names(o.p), "D"));
    rci::io::write_text(dir / "sem.json", rci::io::dump(rci::io::sem_to_json(sem)));
  }
  std::cout << "wrote " << o.reps << " replication(s) under " << root.string() << "\n";
  return 0;
}

std::string rankings_csv(const std::vector<rci::Ranking>& ranks, const std::vector<std::string>& ids,
                         const std::vector<std::string>& names) {
  std::ostringstream s;
  s << "sample_id,root_cause_count";
  for (std::size_t i = 0; i < names.size(); ++i) s << ",rank_" << (i + 1);
  s << '\n';
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    s << ids[k] << ',' << ranks[k].root_cause_count;
    for (std::size_t v : ranks[k].order) s << ',' << names[v];
    s << '\n';
  }
  return s.str();
}

int cmd_analyze(const Options& o) {
  require_param(!o.in.empty(), "--in is required for analyze");
  require_param(o.alpha > 0 && o.alpha <= 1, "--alpha must lie in (0, 1]");
  require_param(o.test_frac >= 0 && o.test_frac < 1, "--test-frac must lie in [0, 1)");
  const auto methods = resolve_methods(o, {o.mode == "full" ? rci::bench::Method::RciFull
                                                             : rci::bench::Method::RciLocalPlus});

  const auto table = rci::io::read_csv(o.in);
  const auto data = rci::io::split_label(table, o.label_col);
  const auto& names = data.data.names;
  const Eigen::Index n = data.data.values.rows();
  const auto n_test = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * o.test_frac));
  const Eigen::Index n_train = n - n_test;
  if (o.test_frac > 0)
    require_param(n_test >= 1 && n_train >= 2, "--test-frac leaves an empty train or test set");

  const rci::Matrix train = data.data.values.topRows(n_train);
  const rci::Labels labels = data.labels.head(n_train);
  const rci::Matrix test = data.data.values.bottomRows(n_test);
  const rci::Matrix* test_ptr = n_test > 0 ? &test : nullptr;
  // Sample ids are 1-based row numbers of the input file's data rows.
  std::vector<std::string> ids;
  for (Eigen::Index k = (n_test > 0 ? n_train : 0); k < n; ++k) ids.push_back(std::to_string(k + 1));
  {
    const auto ones = (labels.array() == 1).count();
    if (ones == 0 || ones == labels.size())
      throw rci::InputError("label column '" + o.label_col + "' has a single class in the training rows");
  }

  const fs::path out(o.out);
  json summary;
  summary["input"] = fs::path(o.in).filename().string();
  summary["label_col"] = o.label_col;
  summary["n"] = n;
  summary["p"] = names.size();
  summary["alpha"] = o.alpha;
  summary["test_frac"] = o.test_frac;
  summary["n_train"] = n_train;
  summary["n_scored"] = ids.size();
  summary["variables"] = names;
  json results = json::array();

  for (const auto method : methods) {
    const std::string tag(rci::bench::to_string(method));
    rci::Matrix scores;
    json entry{{"method", tag}};
    if (method == rci::bench::Method::RciFull || method == rci::bench::Method::RciLocalPlus) {
      const auto mode = method == rci::bench::Method::RciFull ? rci::RciMode::Full : rci::RciMode::LocalPlus;
      const rci::RciResult r = test_ptr ? rci::run_rci(train, labels, test, o.alpha, mode)
                                        : rci::run_rci(train, labels, o.alpha, mode);
      scores = r.shapley.scores;
      std::vector<std::string> kept_names;
      for (std::size_t i : r.extraction.order) kept_names.push_back(names[i]);
      rci::io::write_text(out / ("model_" + tag + ".json"),
                          rci::io::dump(rci::io::model_to_json(r.model, r.extraction.order)));
      rci::io::write_text(out / ("extraction_" + tag + ".json"),
                          rci::io::dump(rci::io::extraction_to_json(r.extraction)));
      entry["kept"] = kept_names;
      entry["converged"] = r.model.converged;
      entry["empty_kept_set"] = r.shapley.empty_kept_warning;
      if (r.shapley.empty_kept_warning)
        std::cerr << "warning: " << tag << ": no variable passed the ancestor screen; scores are zero\n";
    } else {
      const auto b = method == rci::bench::Method::TT   ? rci::BaselineMethod::TT
                     : method == rci::bench::Method::LR ? rci::BaselineMethod::LR
                                                        : rci::BaselineMethod::CO;
      const rci::BaselineScores bs = rci::baseline_scores(b, train, labels, o.alpha, test_ptr);
      scores = bs.scores;
      entry["converged"] = bs.converged;
      if (b == rci::BaselineMethod::TT) entry["ttest"] = "welch";
    }
    rci::io::write_text(out / ("scores_" + tag + ".csv"), rci::io::scores_csv(scores, ids, names));
    rci::io::write_text(out / ("rankings_" + tag + ".csv"), rankings_csv(rci::rank_rows(scores), ids, names));
    results.push_back(entry);
  }
  summary["methods"] = results;
  rci::io::write_text(out / "summary.json", rci::io::dump(summary));
  std::cout << "wrote results for " << methods.size() << " method(s) to " << out.string() << "\n";
  return 0;
}

int cmd_benchmark(const Options& o) {
  check_common(o);
  rci::bench::Config cfg;
  cfg.n = o.n;
  cfg.p = o.p;
  cfg.expected_neighbors = o.en;
  cfg.replications = o.reps;
  cfg.alpha = o.alpha;
  cfg.methods = resolve_methods(o, {rci::bench::kAllMethods.begin(), rci::bench::kAllMethods.end()});
  cfg.seed = o.seed;
  cfg.test_fraction = o.test_frac;
  cfg.workers = o.workers;
  cfg.timing = !o.no_timing;
  cfg.ablation = !o.no_ablation;
  const auto results = rci::bench::run_all(cfg);
  const json report = rci::bench::report_json(cfg, results);
  const fs::path path = fs::path(o.out) / "report.json";
  rci::io::write_text(path, rci::io::dump(report));

  for (const auto& [method, s] : report["summary"].items()) {
    std::cout << method << ": rbo_weighted " << s["rbo_weighted"]["mean"].get<double>();
    if (!s["mse"].is_null()) std::cout << ", mse " << s["mse"]["mean"].get<double>();
    std::cout << "\n";
  }
  if (report.contains("ablation") && cfg.timing)
    for (const auto& [variant, s] : report["ablation"]["summary"].items())
      if (!s["speedup_vs_original"].is_null())
        std::cout << "ablation " << variant << ": speedup " << s["speedup_vs_original"].get<double>() << "\n";
  std::cout << "report: " << path.string() << "\n";
  return 0;
}

int exit_code(std::string_view category) {
  if (category == "parameter") return 3;
  if (category == "input") return 4;
  if (category == "degenerate") return 5;
  if (category == "metric") return 6;
  if (category == "io") return 7;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Root causal inference on linear non-Gaussian cohorts"};
  app.require_subcommand(1);

  auto add_model_flags = [&o](CLI::App* sub) {
    sub->add_option("--n", o.n, "samples per replication");
    sub->add_option("--p", o.p, "number of variables");
    sub->add_option("--en", o.en, "expected neighbourhood size of the random DAG");
    sub->add_option("--reps", o.reps, "number of replications");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto add_method_flags = [&o](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "ancestor-screen significance level");
    sub->add_option("--mode", o.mode, "RCI extraction: full or local_plus");
    sub->add_option("--methods", o.methods, "rci, rci_full, rci_local_plus, tt, lr, co")->delimiter(',');
    sub->add_option("--test-frac", o.test_frac, "fraction of tail rows scored out of sample (0: in-sample)");
  };

  auto* simulate = app.add_subcommand("simulate", "write simulated cohorts and their generating models");
  add_model_flags(simulate);

  auto* analyze = app.add_subcommand("analyze", "score a labelled CSV with the selected methods");
  add_method_flags(analyze);
  analyze->add_option("--in", o.in, "input CSV with a header row");
  analyze->add_option("--out", o.out, "output directory");
  analyze->add_option("--label-col", o.label_col, "name of the binary label column");

  auto* benchmark = app.add_subcommand("benchmark", "simulate, score and evaluate every method");
  add_model_flags(benchmark);
  add_method_flags(benchmark);
  benchmark->add_option("--workers", o.workers, "replications run concurrently");
  benchmark->add_flag("--no-timing", o.no_timing, "omit wall-clock fields so reports are byte-reproducible");
  benchmark->add_flag("--no-ablation", o.no_ablation, "skip the four-way extraction ablation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*analyze) return cmd_analyze(o);
    return cmd_benchmark(o);
  } catch (const rci::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
