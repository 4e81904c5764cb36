#include "nnq/cli.h"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "nnq/dataset.h"
#include "nnq/estimator.h"
#include "nnq/harness.h"
#include "nnq/report.h"

namespace nnq {

using json = nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data;
  std::string train;
  std::string test;
  std::string text;
  std::string out;
  std::string format = "json";
  std::string config_path;
  std::string kernel = "bleu-star";
  std::string smoothing = "epsilon";
  std::string similarity_table;
  std::optional<double> tau;
  double epsilon = 0.1;
  int min_neighbors = 5;
  double max_neighbor_frac = 0.66;
  std::optional<double> subsample_frac;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  int threads = 1;
  int permutations = kDefaultPermutations;
  // sweep
  std::string param;
  std::string grid;
  // curve
  std::string sizes;
  int runs = 20;
  // splits
  bool self_exclude_duplicates = false;
  bool exclude_same_id = false;
  std::string train_topic;
  std::string test_topic;
  int min_sentences = 0;
  int max_sentences = 0;
  std::string source_task;
  std::string target_task;
};

void add_estimator_flags(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_path,
                  "JSON file of defaults (flags take precedence)");
  app->add_option("--kernel", o.kernel,
                  "bleu-star | bleu4 | rouge-l | meteor-lite | external");
  app->add_option("--similarity-table", o.similarity_table,
                  "candidate_id,example_id,score table for --kernel external");
  app->add_option("--tau", o.tau, "similarity threshold (kernel default if unset)");
  app->add_option("--min-neighbors", o.min_neighbors, "evidence threshold a");
  app->add_option("--max-neighbor-frac", o.max_neighbor_frac,
                  "evidence threshold b");
  app->add_option("--smoothing", o.smoothing, "none | epsilon | add-one");
  app->add_option("--epsilon", o.epsilon, "numerator used by epsilon smoothing");
  app->add_option("--subsample-frac", o.subsample_frac,
                  "score each candidate against a random fraction of S");
  app->add_option("--seed", o.seed, "RNG seed (falls back to $NNQ_SEED)");
  app->add_option("--scale", o.scale,
                  "raw score scale for records that do not carry one");
  app->add_option("--threads", o.threads, "worker threads");
  app->add_option("--permutations", o.permutations,
                  "permutations for the Spearman p-value");
  app->add_option("--format", o.format, "json | csv");
  app->add_option("--out", o.out, "report path (stdout summary only if unset)");
}

// Copies config-file values into options whose flag was not given.
void apply_config_file(CLI::App* app, Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw UsageError("cannot open config file " + o.config_path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw UsageError("config file " + o.config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

  using Setter = std::function<void(const json&)>;
  const std::map<std::string, Setter> setters = {
      {"kernel", [&](const json& v) { o.kernel = v.get<std::string>(); }},
      {"similarity-table",
       [&](const json& v) { o.similarity_table = v.get<std::string>(); }},
      {"tau", [&](const json& v) { o.tau = v.get<double>(); }},
      {"min-neighbors", [&](const json& v) { o.min_neighbors = v.get<int>(); }},
      {"max-neighbor-frac",
       [&](const json& v) { o.max_neighbor_frac = v.get<double>(); }},
      {"smoothing", [&](const json& v) { o.smoothing = v.get<std::string>(); }},
      {"epsilon", [&](const json& v) { o.epsilon = v.get<double>(); }},
      {"subsample-frac", [&](const json& v) { o.subsample_frac = v.get<double>(); }},
      {"seed", [&](const json& v) { o.seed = v.get<std::uint64_t>(); }},
      {"scale", [&](const json& v) { o.scale = v.get<double>(); }},
      {"threads", [&](const json& v) { o.threads = v.get<int>(); }},
      {"permutations", [&](const json& v) { o.permutations = v.get<int>(); }},
      {"format", [&](const json& v) { o.format = v.get<std::string>(); }},
      {"param", [&](const json& v) { o.param = v.get<std::string>(); }},
      {"grid", [&](const json& v) { o.grid = v.get<std::string>(); }},
      {"sizes", [&](const json& v) { o.sizes = v.get<std::string>(); }},
      {"runs", [&](const json& v) { o.runs = v.get<int>(); }},
  };
  for (const auto& [key, value] : cfg.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw UsageError("config file: unknown key '" + key + "'");
    }
    const std::string flag = "--" + key;
    bool given = false;
    try {
      given = app->count(flag) > 0;
    } catch (const CLI::OptionNotFound&) {
      given = false;
    }
    if (given) continue;
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw UsageError("config file: bad value for '" + key + "': " + e.what());
    }
  }
}

EstimatorConfig resolve_config(const Options& o) {
  EstimatorConfig c;
  try {
    c.kernel = parse_kernel(o.kernel);
    c.smoothing.mode = parse_smoothing(o.smoothing);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.tau = o.tau.value_or(default_tau(c.kernel));
  c.min_neighbors = o.min_neighbors;
  c.max_neighbor_frac = o.max_neighbor_frac;
  c.smoothing.epsilon = o.epsilon;
  c.train_subsample_frac = o.subsample_frac;
  if (o.seed) {
    c.seed = *o.seed;
  } else if (const char* env = std::getenv("NNQ_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw UsageError(std::string("NNQ_SEED is not an unsigned integer: ") + env);
    }
  }
  if (c.kernel == KernelKind::kExternal) {
    if (o.similarity_table.empty()) {
      throw UsageError("--kernel external needs --similarity-table");
    }
    c.similarity_table = std::make_shared<SimilarityTable>(
        SimilarityTable::load(o.similarity_table));
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.threads < 1) throw UsageError("--threads must be >= 1");
  if (o.permutations < 0) throw UsageError("--permutations must be >= 0");
  if (o.format != "json" && o.format != "csv") {
    throw UsageError("--format must be json or csv");
  }
  return c;
}

HarnessOptions harness_options(const Options& o) {
  return {o.threads, o.permutations};
}

LoadOptions load_options(const Options& o, bool allow_unscored = false) {
  LoadOptions l;
  if (o.scale) l.default_scale = *o.scale;
  l.allow_unscored = allow_unscored;
  return l;
}

std::vector<ScoredExample> require_dataset(const std::string& path,
                                           const char* flag,
                                           const LoadOptions& options) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  return load_dataset(path, options);
}

std::vector<ScoredExample> filter_items(std::vector<ScoredExample> items,
                                        const std::string& topic,
                                        int min_sentences, int max_sentences) {
  std::vector<ScoredExample> kept;
  for (auto& ex : items) {
    if (!topic.empty() && ex.topic.value_or("") != topic) continue;
    const auto sentences = static_cast<int>(count_sentences(ex.doc.text));
    if (min_sentences > 0 && sentences < min_sentences) continue;
    if (max_sentences > 0 && sentences > max_sentences) continue;
    kept.push_back(std::move(ex));
  }
  return kept;
}

std::string opt_text(const std::optional<double>& v) {
  return v ? format_double(*v) : "undefined";
}

std::string summary_line(const EvalReport& r) {
  std::ostringstream s;
  s << "rho=" << opt_text(r.spearman_rho) << " mse=" << opt_text(r.mse)
    << " coverage=" << format_double(r.coverage) << " (" << r.n_scored << "/"
    << r.n_total << " scored)";
  return s.str();
}

struct Output {
  json document;
  std::string csv;
  std::string summary;
};

json provenance(const std::string& command, const EstimatorConfig& config,
                const Options& o) {
  json j;
  j["command"] = command;
  json cfg = to_json(config);
  if (!o.data.empty()) cfg["data"] = o.data;
  if (!o.train.empty()) cfg["train"] = o.train;
  if (!o.test.empty()) cfg["test"] = o.test;
  cfg["permutations"] = o.permutations;
  j["config"] = std::move(cfg);
  return j;
}

Output run_score(const Options& o, const EstimatorConfig& config) {
  const auto train = require_dataset(o.train, "--train", load_options(o));
  std::vector<ScoredExample> candidates;
  if (!o.text.empty()) {
    candidates.push_back(make_scored_example("text", o.text, 0.0));
  } else {
    candidates = require_dataset(o.data, "--data (or --text)",
                                 load_options(o, /*allow_unscored=*/true));
  }
  std::vector<Prediction> predictions(candidates.size());
  json rows = json::array();
  std::ostringstream csv;
  csv << "id,estimate,neighbor_count,rejection\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    predictions[i] = estimate(candidates[i].doc, train, config);
    json row = to_json(predictions[i]);
    row["id"] = candidates[i].id();
    rows.push_back(std::move(row));
    const auto& p = predictions[i];
    csv << candidates[i].id() << ','
        << (p.estimate ? format_double(*p.estimate) : "") << ','
        << p.neighbor_count << ','
        << (p.rejection ? rejection_name(*p.rejection) : "") << '\n';
  }
  Output out;
  out.document = provenance("score", config, o);
  const double cov = candidates.empty() ? 0.0 : coverage(predictions);
  out.document["report"] = {{"coverage", cov}, {"predictions", std::move(rows)}};
  out.csv = csv.str();
  std::ostringstream s;
  if (candidates.size() == 1) {
    s << "estimate=" << opt_text(predictions[0].estimate)
      << " neighbors=" << predictions[0].neighbor_count;
  } else {
    s << "coverage=" << format_double(cov) << " (" << candidates.size()
      << " candidates)";
  }
  out.summary = s.str();
  return out;
}

Output eval_output(const std::string& command, const EvalReport& report,
                   const EstimatorConfig& config, const Options& o) {
  Output out;
  out.document = provenance(command, config, o);
  out.document["report"] = to_json(report);
  out.csv = to_csv(report);
  out.summary = summary_line(report);
  return out;
}

Output run_eval_loo(const Options& o, const EstimatorConfig& config) {
  const auto data = require_dataset(o.data, "--data", load_options(o));
  return eval_output("eval-loo", leave_one_out(data, config, harness_options(o)),
                     config, o);
}

Output run_eval_split(const Options& o, const EstimatorConfig& config) {
  auto train = require_dataset(o.train, "--train", load_options(o));
  auto test = require_dataset(o.test, "--test", load_options(o));
  train = filter_items(std::move(train), o.train_topic, 0, 0);
  test = filter_items(std::move(test), o.test_topic, o.min_sentences,
                      o.max_sentences);
  if (test.empty()) throw UsageError("no test items left after filtering");
  SplitOptions split;
  split.exclude_duplicate_text = o.self_exclude_duplicates;
  split.exclude_same_id = o.exclude_same_id;
  return eval_output(
      "eval-split",
      train_test_eval(train, test, config, harness_options(o), split), config, o);
}

Output run_cross_task(const Options& o, const EstimatorConfig& config) {
  const auto train = require_dataset(o.train, "--train", load_options(o));
  const auto test = require_dataset(o.test, "--test", load_options(o));
  auto task_of = [](const std::vector<ScoredExample>& items,
                    const std::string& path, const std::string& given) {
    if (!given.empty()) return given;
    if (!items.empty() && items.front().task) return *items.front().task;
    return std::filesystem::path(path).stem().string();
  };
  SplitOptions split;
  split.exclude_same_id = o.exclude_same_id;
  split.exclude_duplicate_text = o.self_exclude_duplicates;
  const auto report =
      cross_task(train, test, config, task_of(train, o.train, o.source_task),
                 task_of(test, o.test, o.target_task), harness_options(o), split);
  auto out = eval_output("cross-task", report, config, o);
  out.summary = *report.source_task + " -> " + *report.target_task + ": " +
                out.summary;
  return out;
}

Output run_sweep(const Options& o, const EstimatorConfig& config) {
  const auto data = require_dataset(o.data, "--data", load_options(o));
  if (o.param.empty()) throw UsageError("--param is required");
  if (o.grid.empty()) throw UsageError("--grid is required");
  SweepParameter parameter;
  std::vector<double> grid;
  try {
    parameter = parse_sweep_parameter(o.param);
    grid = parse_grid(o.grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto result = sweep(data, config, parameter, grid, harness_options(o));
  Output out;
  out.document = provenance("sweep", config, o);
  out.document["report"] = to_json(result);
  out.csv = to_csv(result);
  out.summary = "sweep over " + std::string(sweep_parameter_name(parameter)) +
                ": " + std::to_string(result.points.size()) + " grid points";
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& spec) {
  std::vector<std::size_t> sizes;
  for (double v : parse_grid(spec)) {
    if (v < 1 || v != std::floor(v)) {
      throw UsageError("--sizes must list positive integers");
    }
    sizes.push_back(static_cast<std::size_t>(v));
  }
  return sizes;
}

Output run_curve(const Options& o, const EstimatorConfig& config) {
  const auto data = require_dataset(o.data, "--data", load_options(o));
  if (o.sizes.empty()) throw UsageError("--sizes is required");
  std::vector<std::size_t> sizes;
  try {
    sizes = parse_sizes(o.sizes);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto result = subsample_curve(data, config, sizes, o.runs, config.seed,
                                      harness_options(o));
  Output out;
  out.document = provenance("curve", config, o);
  out.document["report"] = to_json(result);
  out.csv = to_csv(result);
  std::ostringstream s;
  s << "curve: " << result.points.size() << " sizes x " << result.runs << " runs";
  if (!result.points.empty()) {
    const auto& last = result.points.back();
    s << "; size " << last.size << ": rho=" << format_double(last.rho_mean)
      << " coverage=" << format_double(last.coverage_mean);
  }
  out.summary = s.str();
  return out;
}

Output run_baselines(const Options& o, const EstimatorConfig& config) {
  const auto data = require_dataset(o.data, "--data", load_options(o));
  const auto mean_report = mean_baseline(data);
  const auto loo = leave_one_out(data, config, harness_options(o));

  json report;
  report["mean_baseline"] = {{"mse", *mean_report.mse},
                             {"n_total", mean_report.n_total}};
  report["estimator"] = {{"mse", loo.mse ? json(*loo.mse) : json(nullptr)},
                         {"spearman_rho", loo.spearman_rho ? json(*loo.spearman_rho)
                                                           : json(nullptr)},
                         {"coverage", loo.coverage}};
  std::ostringstream csv;
  csv << "baseline,mse,spearman_rho,coverage\n";
  csv << "mean," << format_double(*mean_report.mse) << ",,1\n";
  csv << "estimator," << (loo.mse ? format_double(*loo.mse) : "") << ','
      << (loo.spearman_rho ? format_double(*loo.spearman_rho) : "") << ','
      << format_double(loo.coverage) << '\n';

  const bool annotated = std::any_of(data.begin(), data.end(), [](const auto& ex) {
    return !ex.annotator_scores.empty();
  });
  std::ostringstream summary;
  summary << "mean-baseline mse=" << format_double(*mean_report.mse) << "; "
          << summary_line(loo);
  if (annotated) {
    const auto humans = annotator_baselines(data);
    report["annotators"] = to_json(humans);
    csv << "human-best," << format_double(humans.best_mse) << ','
        << (humans.best_rho ? format_double(*humans.best_rho) : "") << ",1\n";
    csv << "human-average," << format_double(humans.average_mse) << ','
        << (humans.average_rho ? format_double(*humans.average_rho) : "")
        << ",1\n";
    std::vector<Prediction> predictions;
    for (const auto& item : loo.per_item) predictions.push_back(item.prediction);
    try {
      report["subset_comparison"] = to_json(subset_error_comparison(data, predictions));
    } catch (const std::invalid_argument& e) {
      report["subset_comparison"] = {{"error", e.what()}};
    }
    summary << "; human-average mse=" << format_double(humans.average_mse);
  }
  Output out;
  out.document = provenance("baselines", config, o);
  out.document["report"] = std::move(report);
  out.csv = csv.str();
  out.summary = summary.str();
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
      throw std::invalid_argument("bad number '" + text + "' in grid '" + spec + "'");
    }
    return v;
  };
  std::vector<double> values;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) {
      throw std::invalid_argument("grid range must be start:stop:step");
    }
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw std::invalid_argument("grid range needs step > 0 and stop >= start");
    }
    const auto count =
        static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
      values.push_back(start + static_cast<double>(k) * step);
    }
  } else {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) values.push_back(number(part));
    }
  }
  if (values.empty()) throw std::invalid_argument("grid is empty");
  return values;
}

int run_command(std::span<const std::string> args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Reference-less text quality estimation with n-gram neighbors",
               "nnq"};
  app.require_subcommand(1);
  Options o;

  auto* score = app.add_subcommand("score", "Estimate quality of new texts");
  add_estimator_flags(score, o);
  score->add_option("--train", o.train, "scored training set")->required();
  score->add_option("--data", o.data, "candidates to score");
  score->add_option("--text", o.text, "a single text to score");

  auto* loo = app.add_subcommand("eval-loo", "Leave-one-out evaluation");
  add_estimator_flags(loo, o);
  loo->add_option("--data", o.data, "scored dataset")->required();

  auto* split = app.add_subcommand("eval-split", "Train/test evaluation");
  add_estimator_flags(split, o);
  split->add_option("--train", o.train)->required();
  split->add_option("--test", o.test)->required();
  split->add_flag("--self-exclude-duplicates", o.self_exclude_duplicates,
                  "drop training texts identical to the candidate");
  split->add_flag("--exclude-same-id", o.exclude_same_id,
                  "drop training items sharing the candidate's id");
  split->add_option("--train-topic", o.train_topic, "keep training items of this topic");
  split->add_option("--test-topic", o.test_topic, "keep test items of this topic");
  split->add_option("--min-sentences", o.min_sentences, "test items: minimum sentences");
  split->add_option("--max-sentences", o.max_sentences, "test items: maximum sentences");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one evidence threshold");
  add_estimator_flags(sweep_cmd, o);
  sweep_cmd->add_option("--data", o.data)->required();
  sweep_cmd->add_option("--param", o.param, "a | b | tau");
  sweep_cmd->add_option("--grid", o.grid, "start:stop:step or v1,v2,...");

  auto* curve = app.add_subcommand("curve", "Training-size curve");
  add_estimator_flags(curve, o);
  curve->add_option("--data", o.data)->required();
  curve->add_option("--sizes", o.sizes, "subset sizes, list or start:stop:step");
  curve->add_option("--runs", o.runs, "random subsets per size");

  auto* cross = app.add_subcommand("cross-task", "Train on one task, test on another");
  add_estimator_flags(cross, o);
  cross->add_option("--train", o.train)->required();
  cross->add_option("--test", o.test)->required();
  cross->add_option("--source-task", o.source_task);
  cross->add_option("--target-task", o.target_task);
  cross->add_flag("--exclude-same-id", o.exclude_same_id,
                  "drop training items sharing the candidate's id");
  cross->add_flag("--self-exclude-duplicates", o.self_exclude_duplicates,
                  "drop training texts identical to the candidate");

  auto* base = app.add_subcommand("baselines",
                                  "Mean, annotator and scored-subset baselines");
  add_estimator_flags(base, o);
  base->add_option("--data", o.data)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();
  try {
    apply_config_file(active, o);
    const auto config = resolve_config(o);
    Output result;
    if (command == "score") result = run_score(o, config);
    else if (command == "eval-loo") result = run_eval_loo(o, config);
    else if (command == "eval-split") result = run_eval_split(o, config);
    else if (command == "sweep") result = run_sweep(o, config);
    else if (command == "curve") result = run_curve(o, config);
    else if (command == "cross-task") result = run_cross_task(o, config);
    else result = run_baselines(o, config);

    if (!o.out.empty()) {
      const std::string body =
          o.format == "csv" ? result.csv : result.document.dump(2) + "\n";
      write_file_atomic(o.out, body);
    }
    out << result.summary << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << "nnq " << command << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "nnq " << command << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nnq
