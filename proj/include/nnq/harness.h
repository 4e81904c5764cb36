#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnq/estimator.h"
#include "nnq/stats.h"

namespace nnq {

struct HarnessOptions {
  // Worker threads for kernel evaluation; results never depend on it.
  int threads = 1;
  // Permutations for the Spearman p-value; 0 skips the test.
  int permutations = kDefaultPermutations;
};

struct ItemResult {
  std::string id;
  double truth = 0.0;
  Prediction prediction;
};

// MSE and Spearman are computed over the scored items only.
struct EvalReport {
  std::optional<double> mse;
  std::optional<double> spearman_rho;
  std::optional<double> rho_p_value;
  double coverage = 0.0;
  std::size_t n_total = 0;
  std::size_t n_scored = 0;
  std::vector<ItemResult> per_item;
  std::optional<std::string> source_task;
  std::optional<std::string> target_task;
};

// Scores every item with all other items as the training set (b applies to
// n - 1). Throws std::invalid_argument if the dataset has fewer than a + 1
// items.
EvalReport leave_one_out(std::span<const ScoredExample> dataset,
                         const EstimatorConfig& config,
                         const HarnessOptions& options = {});

struct SplitOptions {
  // Drop training items whose id equals the candidate's.
  bool exclude_same_id = false;
  // Drop training items whose text is identical to the candidate's.
  bool exclude_duplicate_text = false;
};

EvalReport train_test_eval(std::span<const ScoredExample> train,
                           std::span<const ScoredExample> test,
                           const EstimatorConfig& config,
                           const HarnessOptions& options = {},
                           const SplitOptions& split = {});

// train_test_eval tagged with the source and target task names.
EvalReport cross_task(std::span<const ScoredExample> train,
                      std::span<const ScoredExample> test,
                      const EstimatorConfig& config,
                      std::string source_task, std::string target_task,
                      const HarnessOptions& options = {},
                      const SplitOptions& split = {});

enum class SweepParameter { kMinNeighbors, kMaxNeighborFrac, kTau };

std::string_view sweep_parameter_name(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

struct SweepPoint {
  double value = 0.0;
  std::optional<double> spearman_rho;
  std::optional<double> mse;
  double coverage = 0.0;
  std::size_t n_scored = 0;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::kMinNeighbors;
  std::vector<SweepPoint> points;
};

// One leave-one-out run per grid value, everything else held at `config`.
// The grid must be non-empty, strictly increasing and valid for the
// parameter (a: integers >= 1; b, tau: within [0, 1]).
SweepResult sweep(std::span<const ScoredExample> dataset,
                  const EstimatorConfig& config, SweepParameter parameter,
                  std::span<const double> grid,
                  const HarnessOptions& options = {});

struct CurvePoint {
  std::size_t size = 0;
  // Statistics over the runs whose rho was defined.
  std::size_t runs_with_rho = 0;
  double rho_mean = 0.0;
  double rho_std = 0.0;
  double coverage_mean = 0.0;
  double coverage_std = 0.0;
};

struct CurveResult {
  int runs = 0;
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
};

// For each size n: draw `runs` seeded random subsets of n items, run
// leave-one-out on each, and report mean and sample standard deviation of
// rho and coverage.
CurveResult subsample_curve(std::span<const ScoredExample> dataset,
                            const EstimatorConfig& config,
                            std::span<const std::size_t> sizes, int runs,
                            std::uint64_t seed,
                            const HarnessOptions& options = {});

// Predicts the dataset mean for every item. rho is left undefined.
EvalReport mean_baseline(std::span<const ScoredExample> dataset);

struct AnnotatorMetrics {
  std::string annotator;
  std::size_t n_items = 0;
  double mse = 0.0;
  std::optional<double> rho;
};

struct AnnotatorBaselines {
  std::vector<AnnotatorMetrics> per_annotator;
  double best_mse = 0.0;
  std::optional<double> best_rho;
  double average_mse = 0.0;
  std::optional<double> average_rho;
};

// Each annotator's normalized scores against the ground truth, over only the
// items that annotator scored. Annotators with fewer than 3 items are
// skipped; throws std::invalid_argument when none remain.
AnnotatorBaselines annotator_baselines(std::span<const ScoredExample> dataset);

struct SubsetComparison {
  double mean_sq_err_all = 0.0;
  double mean_sq_err_scored = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_all = 0;
  std::size_t n_scored = 0;
};

// Compares annotator error on all items against annotator error on the items
// the estimator scored. Each item contributes the mean squared error of the
// annotators who rated it; the two groups are compared with Welch's t-test.
// `predictions[i]` belongs to `dataset[i]`.
SubsetComparison subset_error_comparison(
    std::span<const ScoredExample> dataset,
    std::span<const Prediction> predictions);

}  // namespace nnq
