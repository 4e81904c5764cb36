#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnq/kernels.h"
#include "nnq/similarity_table.h"
#include "nnq/text.h"

namespace nnq {

struct AnnotatorScore {
  std::string annotator;
  double raw = 0.0;
};

// A training (or test) text with its human-judged quality.
struct ScoredExample {
  Document doc;
  // Normalized quality in [0, 1].
  double quality = 0.0;
  // Maximum raw score; annotator scores are divided by it.
  double scale = 1.0;
  std::vector<AnnotatorScore> annotator_scores;
  std::optional<std::string> task;
  std::optional<std::string> topic;

  const std::string& id() const { return doc.id; }
};

// Throws std::invalid_argument if quality is outside [0, 1].
ScoredExample make_scored_example(std::string id, std::string text,
                                  double quality);

enum class KernelKind { kBleuStar, kBleu4, kRougeL, kMeteorLite, kExternal };

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel(std::string_view name);

// Similarity threshold that works across tasks for each kernel.
double default_tau(KernelKind kind);

struct EstimatorConfig {
  KernelKind kernel = KernelKind::kBleuStar;
  double tau = 0.08;
  // Minimum neighborhood size (a).
  int min_neighbors = 5;
  // Largest neighborhood allowed, as a fraction of the training set (b).
  double max_neighbor_frac = 0.66;
  SmoothingPolicy smoothing;
  // When set, each candidate is scored against a seeded random subset of
  // this fraction of the training set.
  std::optional<double> train_subsample_frac;
  std::uint64_t seed = 0;
  // Required by KernelKind::kExternal.
  std::shared_ptr<const SimilarityTable> similarity_table;

  // Throws std::invalid_argument on out-of-range parameters.
  void validate() const;

  static EstimatorConfig for_kernel(KernelKind kind);
};

// Binds a kernel choice to documents.
class Kernel {
 public:
  explicit Kernel(const EstimatorConfig& config);

  double operator()(const Document& candidate, const Document& example) const;

 private:
  KernelKind kind_;
  SmoothingPolicy smoothing_;
  std::shared_ptr<const SimilarityTable> table_;
};

enum class Rejection { kTooFew, kTooMany };

std::string_view rejection_name(Rejection r);
Rejection parse_rejection(std::string_view name);

struct Neighbor {
  // Index into the corpus the neighbor was drawn from.
  std::size_t index = 0;
  std::string id;
  double score = 0.0;
};

struct Prediction {
  std::optional<double> estimate;
  std::size_t neighbor_count = 0;
  std::vector<std::string> neighbor_ids;
  std::optional<Rejection> rejection;

  bool defined() const { return estimate.has_value(); }
};

// Indices of `corpus_size` items a candidate may be compared against:
// everything not in `excluded` (sorted), then, if the config asks for it, a
// uniform subsample seeded by (config.seed, candidate_id).
std::vector<std::size_t> training_indices(
    std::size_t corpus_size, std::span<const std::size_t> excluded,
    const EstimatorConfig& config, std::string_view candidate_id);

// Keeps the training items whose score is >= tau, ordered by descending
// score, then id, then index. `scores[k]` belongs to `corpus[train[k]]`.
std::vector<Neighbor> select_neighbors(std::span<const ScoredExample> corpus,
                                       std::span<const std::size_t> train,
                                       std::span<const double> scores,
                                       double tau);

// Applies the evidence thresholds a <= |N| <= b * train_size and averages
// neighbor qualities when they hold.
Prediction decide(std::span<const ScoredExample> corpus,
                  std::span<const Neighbor> neighbors, std::size_t train_size,
                  const EstimatorConfig& config);

// All examples of `train` scoring >= tau against the candidate. The caller
// keeps the candidate itself out of `train`.
std::vector<Neighbor> find_neighbors(const Document& candidate,
                                     std::span<const ScoredExample> train,
                                     const EstimatorConfig& config);

Prediction estimate(const Document& candidate,
                    std::span<const ScoredExample> train,
                    const EstimatorConfig& config);

// Fraction of predictions that are defined. Throws on an empty list.
double coverage(std::span<const Prediction> predictions);

}  // namespace nnq
