#include "nnq/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "nnq/random.h"

namespace nnq {
namespace {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(
      std::clamp<long>(threads, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Kernel scores of each candidate (row) against each corpus item (column).
class ScoreMatrix {
 public:
  ScoreMatrix(std::span<const ScoredExample> candidates,
              std::span<const ScoredExample> corpus,
              const EstimatorConfig& config, int threads)
      : cols_(corpus.size()), data_(candidates.size() * corpus.size()) {
    const Kernel kernel(config);
    parallel_for(candidates.size(), threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        data_[i * cols_ + j] = kernel(candidates[i].doc, corpus[j].doc);
      }
    });
  }

  double at(std::size_t row, std::size_t col) const {
    return data_[row * cols_ + col];
  }

 private:
  std::size_t cols_;
  std::vector<double> data_;
};

EvalReport summarize(std::vector<ItemResult> items,
                     const EstimatorConfig& config,
                     const HarnessOptions& options) {
  EvalReport report;
  report.n_total = items.size();
  std::vector<double> predicted;
  std::vector<double> truths;
  for (const auto& item : items) {
    if (item.prediction.defined()) {
      predicted.push_back(*item.prediction.estimate);
      truths.push_back(item.truth);
    }
  }
  report.n_scored = predicted.size();
  report.coverage = items.empty() ? 0.0
                                  : static_cast<double>(report.n_scored) /
                                        static_cast<double>(report.n_total);
  if (!predicted.empty()) report.mse = mse(predicted, truths);
  if (predicted.size() >= 3) {
    const auto sp = spearman(predicted, truths, options.permutations,
                             derive_seed(config.seed, "spearman"));
    report.spearman_rho = sp.rho;
    report.rho_p_value = sp.p_value;
  }
  report.per_item = std::move(items);
  return report;
}

// Scores candidate k (matrix row rows[k]) against the items of `pool`
// (corpus indices) minus the pool positions returned by excluded(k).
template <typename ExcludeFn>
EvalReport evaluate(std::span<const ScoredExample> candidates,
                    std::span<const std::size_t> rows,
                    const ScoreMatrix& matrix,
                    std::span<const ScoredExample> corpus,
                    std::span<const std::size_t> pool, ExcludeFn&& excluded,
                    const EstimatorConfig& config,
                    const HarnessOptions& options) {
  std::vector<ItemResult> items(candidates.size());
  parallel_for(candidates.size(), options.threads, [&](std::size_t k) {
    const auto& cand = candidates[k];
    const std::vector<std::size_t> skip = excluded(k);
    const auto positions =
        training_indices(pool.size(), skip, config, cand.id());
    std::vector<std::size_t> train;
    std::vector<double> scores;
    train.reserve(positions.size());
    scores.reserve(positions.size());
    for (std::size_t pos : positions) {
      train.push_back(pool[pos]);
      scores.push_back(matrix.at(rows[k], pool[pos]));
    }
    const auto neighbors = select_neighbors(corpus, train, scores, config.tau);
    items[k] = {cand.id(), cand.quality,
                decide(corpus, neighbors, train.size(), config)};
  });
  return summarize(std::move(items), config, options);
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void require_loo_size(std::size_t n, const EstimatorConfig& config) {
  if (n < static_cast<std::size_t>(config.min_neighbors) + 1) {
    throw std::invalid_argument(
        "leave-one-out needs at least a + 1 = " +
        std::to_string(config.min_neighbors + 1) + " items, got " +
        std::to_string(n));
  }
}

EvalReport loo_with_matrix(std::span<const ScoredExample> dataset,
                           const ScoreMatrix& matrix,
                           const EstimatorConfig& config,
                           const HarnessOptions& options) {
  const auto all = iota_indices(dataset.size());
  return evaluate(
      dataset, all, matrix, dataset, all,
      [](std::size_t k) { return std::vector<std::size_t>{k}; }, config,
      options);
}

}  // namespace

EvalReport leave_one_out(std::span<const ScoredExample> dataset,
                         const EstimatorConfig& config,
                         const HarnessOptions& options) {
  config.validate();
  require_loo_size(dataset.size(), config);
  const ScoreMatrix matrix(dataset, dataset, config, options.threads);
  return loo_with_matrix(dataset, matrix, config, options);
}

EvalReport train_test_eval(std::span<const ScoredExample> train,
                           std::span<const ScoredExample> test,
                           const EstimatorConfig& config,
                           const HarnessOptions& options,
                           const SplitOptions& split) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("training set is empty");
  const ScoreMatrix matrix(test, train, config, options.threads);
  const auto rows = iota_indices(test.size());
  const auto pool = iota_indices(train.size());
  auto excluded = [&](std::size_t k) {
    std::vector<std::size_t> out;
    if (!split.exclude_same_id && !split.exclude_duplicate_text) return out;
    for (std::size_t j = 0; j < train.size(); ++j) {
      if ((split.exclude_same_id && train[j].id() == test[k].id()) ||
          (split.exclude_duplicate_text &&
           train[j].doc.text == test[k].doc.text)) {
        out.push_back(j);
      }
    }
    return out;
  };
  return evaluate(test, rows, matrix, train, pool, excluded, config, options);
}

EvalReport cross_task(std::span<const ScoredExample> train,
                      std::span<const ScoredExample> test,
                      const EstimatorConfig& config, std::string source_task,
                      std::string target_task, const HarnessOptions& options,
                      const SplitOptions& split) {
  if (test.empty()) throw std::invalid_argument("test set is empty");
  auto report = train_test_eval(train, test, config, options, split);
  report.source_task = std::move(source_task);
  report.target_task = std::move(target_task);
  return report;
}

std::string_view sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::kMinNeighbors:
      return "a";
    case SweepParameter::kMaxNeighborFrac:
      return "b";
    case SweepParameter::kTau:
      return "tau";
  }
  return "unknown";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "a" || name == "min-neighbors") return SweepParameter::kMinNeighbors;
  if (name == "b" || name == "max-neighbor-frac") {
    return SweepParameter::kMaxNeighborFrac;
  }
  if (name == "tau") return SweepParameter::kTau;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) +
                              "' (expected a, b or tau)");
}

SweepResult sweep(std::span<const ScoredExample> dataset,
                  const EstimatorConfig& config, SweepParameter parameter,
                  std::span<const double> grid,
                  const HarnessOptions& options) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("sweep grid must be strictly increasing");
    }
  }
  std::vector<EstimatorConfig> configs;
  for (double value : grid) {
    EstimatorConfig c = config;
    switch (parameter) {
      case SweepParameter::kMinNeighbors:
        if (value < 1.0 || value != std::floor(value) || value > 1e9) {
          throw std::invalid_argument("sweep grid for a must hold integers >= 1");
        }
        c.min_neighbors = static_cast<int>(value);
        break;
      case SweepParameter::kMaxNeighborFrac:
        c.max_neighbor_frac = value;
        break;
      case SweepParameter::kTau:
        c.tau = value;
        break;
    }
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("invalid sweep grid value: ") +
                                  e.what());
    }
    configs.push_back(std::move(c));
  }
  // The largest a in the grid sets the minimum dataset size.
  for (const auto& c : configs) require_loo_size(dataset.size(), c);

  // Kernel scores depend on none of a, b, tau.
  const ScoreMatrix matrix(dataset, dataset, config, options.threads);
  SweepResult result;
  result.parameter = parameter;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto report = loo_with_matrix(dataset, matrix, configs[g], options);
    result.points.push_back({grid[g], report.spearman_rho, report.mse,
                             report.coverage, report.n_scored});
  }
  return result;
}

CurveResult subsample_curve(std::span<const ScoredExample> dataset,
                            const EstimatorConfig& config,
                            std::span<const std::size_t> sizes, int runs,
                            std::uint64_t seed,
                            const HarnessOptions& options) {
  config.validate();
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  for (std::size_t size : sizes) {
    if (size > dataset.size()) {
      throw std::invalid_argument("curve size " + std::to_string(size) +
                                  " exceeds dataset size " +
                                  std::to_string(dataset.size()));
    }
    require_loo_size(size, config);
  }
  const ScoreMatrix matrix(dataset, dataset, config, options.threads);

  CurveResult result;
  result.runs = runs;
  result.seed = seed;
  for (std::size_t size : sizes) {
    std::vector<double> rhos;
    std::vector<double> coverages;
    for (int r = 0; r < runs; ++r) {
      Rng rng(derive_seed(derive_seed(seed, "curve", size), "run",
                          static_cast<std::uint64_t>(r)));
      const auto subset = rng.sample_indices(dataset.size(), size);
      std::vector<ScoredExample> candidates;
      candidates.reserve(subset.size());
      for (std::size_t i : subset) candidates.push_back(dataset[i]);
      const auto report = evaluate(
          candidates, subset, matrix, dataset, subset,
          [](std::size_t k) { return std::vector<std::size_t>{k}; }, config,
          options);
      if (report.spearman_rho) rhos.push_back(*report.spearman_rho);
      coverages.push_back(report.coverage);
    }
    CurvePoint point;
    point.size = size;
    point.runs_with_rho = rhos.size();
    if (!rhos.empty()) {
      point.rho_mean = mean(rhos);
      point.rho_std = sample_stddev(rhos);
    }
    point.coverage_mean = mean(coverages);
    point.coverage_std = sample_stddev(coverages);
    result.points.push_back(point);
  }
  return result;
}

EvalReport mean_baseline(std::span<const ScoredExample> dataset) {
  if (dataset.empty()) throw std::invalid_argument("dataset is empty");
  std::vector<double> truths;
  truths.reserve(dataset.size());
  for (const auto& ex : dataset) truths.push_back(ex.quality);
  const double m = mean(truths);

  EvalReport report;
  report.n_total = report.n_scored = dataset.size();
  report.coverage = 1.0;
  const std::vector<double> predicted(dataset.size(), m);
  report.mse = mse(predicted, truths);
  for (const auto& ex : dataset) {
    Prediction p;
    p.estimate = m;
    report.per_item.push_back({ex.id(), ex.quality, std::move(p)});
  }
  return report;
}

AnnotatorBaselines annotator_baselines(std::span<const ScoredExample> dataset) {
  struct Column {
    std::vector<double> scores;
    std::vector<double> truths;
  };
  std::map<std::string, Column> columns;
  for (const auto& ex : dataset) {
    for (const auto& a : ex.annotator_scores) {
      auto& col = columns[a.annotator];
      col.scores.push_back(a.raw / ex.scale);
      col.truths.push_back(ex.quality);
    }
  }

  AnnotatorBaselines result;
  std::vector<double> mses;
  std::vector<double> rhos;
  for (const auto& [name, col] : columns) {
    if (col.scores.size() < 3) continue;
    AnnotatorMetrics m;
    m.annotator = name;
    m.n_items = col.scores.size();
    m.mse = mse(col.scores, col.truths);
    m.rho = spearman(col.scores, col.truths, 0).rho;
    mses.push_back(m.mse);
    if (m.rho) rhos.push_back(*m.rho);
    result.per_annotator.push_back(std::move(m));
  }
  if (result.per_annotator.empty()) {
    throw std::invalid_argument(
        "no annotator has scored at least 3 items in this dataset");
  }
  result.best_mse = *std::min_element(mses.begin(), mses.end());
  result.average_mse = mean(mses);
  if (!rhos.empty()) {
    result.best_rho = *std::max_element(rhos.begin(), rhos.end());
    result.average_rho = mean(rhos);
  }
  return result;
}

SubsetComparison subset_error_comparison(
    std::span<const ScoredExample> dataset,
    std::span<const Prediction> predictions) {
  if (dataset.size() != predictions.size()) {
    throw std::invalid_argument(
        "subset_error_comparison: one prediction per dataset item needed");
  }
  std::vector<double> all;
  std::vector<double> scored;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    if (ex.annotator_scores.empty()) continue;
    double total = 0.0;
    for (const auto& a : ex.annotator_scores) {
      const double d = a.raw / ex.scale - ex.quality;
      total += d * d;
    }
    const double err = total / static_cast<double>(ex.annotator_scores.size());
    all.push_back(err);
    if (predictions[i].defined()) scored.push_back(err);
  }
  if (all.size() < 2 || scored.size() < 2) {
    throw std::invalid_argument(
        "subset_error_comparison: need at least two annotated items overall "
        "and two among the scored items");
  }
  SubsetComparison result;
  result.n_all = all.size();
  result.n_scored = scored.size();
  result.mean_sq_err_all = mean(all);
  result.mean_sq_err_scored = mean(scored);
  if (scored.size() == all.size()) return result;
  const auto welch = welch_t_test(all, scored);
  result.t_statistic = welch.t_statistic;
  result.p_value = welch.p_value;
  return result;
}

}  // namespace nnq
