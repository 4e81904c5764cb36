#include "nnq/estimator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nnq/random.h"

namespace nnq {

ScoredExample make_scored_example(std::string id, std::string text,
                                  double quality) {
  if (!(quality >= 0.0 && quality <= 1.0)) {
    throw std::invalid_argument("quality of '" + id + "' must be in [0, 1]");
  }
  ScoredExample ex;
  ex.doc = Document(std::move(id), std::move(text));
  ex.quality = quality;
  return ex;
}

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kBleuStar:
      return "bleu-star";
    case KernelKind::kBleu4:
      return "bleu4";
    case KernelKind::kRougeL:
      return "rouge-l";
    case KernelKind::kMeteorLite:
      return "meteor-lite";
    case KernelKind::kExternal:
      return "external";
  }
  return "unknown";
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "bleu-star" || name == "bleu_star") return KernelKind::kBleuStar;
  if (name == "bleu4" || name == "bleu-4") return KernelKind::kBleu4;
  if (name == "rouge-l" || name == "rouge_l") return KernelKind::kRougeL;
  if (name == "meteor-lite" || name == "meteor_lite") {
    return KernelKind::kMeteorLite;
  }
  if (name == "external") return KernelKind::kExternal;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

double default_tau(KernelKind kind) {
  switch (kind) {
    case KernelKind::kBleuStar:
    case KernelKind::kBleu4:
      return 0.08;
    case KernelKind::kRougeL:
      return 0.06;
    case KernelKind::kMeteorLite:
      return 0.18;
    case KernelKind::kExternal:
      return 0.10;
  }
  return 0.08;
}

void EstimatorConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("tau must be in [0, 1]");
  }
  if (min_neighbors < 1) {
    throw std::invalid_argument("min_neighbors (a) must be >= 1");
  }
  if (!(max_neighbor_frac >= 0.0 && max_neighbor_frac <= 1.0)) {
    throw std::invalid_argument("max_neighbor_frac (b) must be in [0, 1]");
  }
  if (train_subsample_frac &&
      !(*train_subsample_frac > 0.0 && *train_subsample_frac <= 1.0)) {
    throw std::invalid_argument("train_subsample_frac must be in (0, 1]");
  }
  smoothing.validate();
  if (kernel == KernelKind::kExternal && !similarity_table) {
    throw std::invalid_argument("the external kernel needs a similarity table");
  }
}

EstimatorConfig EstimatorConfig::for_kernel(KernelKind kind) {
  EstimatorConfig config;
  config.kernel = kind;
  config.tau = default_tau(kind);
  return config;
}

Kernel::Kernel(const EstimatorConfig& config)
    : kind_(config.kernel),
      smoothing_(config.smoothing),
      table_(config.similarity_table) {}

double Kernel::operator()(const Document& candidate,
                          const Document& example) const {
  switch (kind_) {
    case KernelKind::kBleuStar:
      return bleu_star(candidate.profile, example.profile, smoothing_);
    case KernelKind::kBleu4:
      return bleu4(candidate.profile, example.profile, smoothing_);
    case KernelKind::kRougeL:
      return rouge_l(candidate.tokens, example.tokens);
    case KernelKind::kMeteorLite:
      return meteor_lite_stems(candidate.stems, example.stems);
    case KernelKind::kExternal:
      if (!table_) {
        throw std::logic_error("external kernel without a similarity table");
      }
      return external_similarity(candidate.id, example.id, *table_);
  }
  return 0.0;
}

std::string_view rejection_name(Rejection r) {
  return r == Rejection::kTooFew ? "too_few" : "too_many";
}

Rejection parse_rejection(std::string_view name) {
  if (name == "too_few") return Rejection::kTooFew;
  if (name == "too_many") return Rejection::kTooMany;
  throw std::invalid_argument("unknown rejection '" + std::string(name) + "'");
}

std::vector<std::size_t> training_indices(
    std::size_t corpus_size, std::span<const std::size_t> excluded,
    const EstimatorConfig& config, std::string_view candidate_id) {
  std::vector<std::size_t> kept;
  kept.reserve(corpus_size);
  auto skip = excluded.begin();
  for (std::size_t i = 0; i < corpus_size; ++i) {
    while (skip != excluded.end() && *skip < i) ++skip;
    if (skip != excluded.end() && *skip == i) continue;
    kept.push_back(i);
  }
  if (!config.train_subsample_frac || kept.empty()) return kept;

  const double wanted =
      std::round(*config.train_subsample_frac * static_cast<double>(kept.size()));
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(wanted), 1,
                                         kept.size());
  Rng rng(derive_seed(config.seed, candidate_id));
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t pos : rng.sample_indices(kept.size(), k)) {
    picked.push_back(kept[pos]);
  }
  return picked;
}

std::vector<Neighbor> select_neighbors(std::span<const ScoredExample> corpus,
                                       std::span<const std::size_t> train,
                                       std::span<const double> scores,
                                       double tau) {
  if (train.size() != scores.size()) {
    throw std::invalid_argument("select_neighbors: one score per item needed");
  }
  std::vector<Neighbor> out;
  for (std::size_t k = 0; k < train.size(); ++k) {
    if (scores[k] >= tau) {
      out.push_back({train[k], corpus[train[k]].id(), scores[k]});
    }
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& l, const Neighbor& r) {
    if (l.score != r.score) return l.score > r.score;
    if (l.id != r.id) return l.id < r.id;
    return l.index < r.index;
  });
  return out;
}

Prediction decide(std::span<const ScoredExample> corpus,
                  std::span<const Neighbor> neighbors, std::size_t train_size,
                  const EstimatorConfig& config) {
  Prediction p;
  p.neighbor_count = neighbors.size();
  p.neighbor_ids.reserve(neighbors.size());
  for (const auto& n : neighbors) p.neighbor_ids.push_back(n.id);

  const auto count = static_cast<double>(neighbors.size());
  if (neighbors.size() < static_cast<std::size_t>(config.min_neighbors)) {
    p.rejection = Rejection::kTooFew;
    return p;
  }
  if (count > config.max_neighbor_frac * static_cast<double>(train_size)) {
    p.rejection = Rejection::kTooMany;
    return p;
  }

  // Summed in sorted order so the mean does not depend on corpus order.
  std::vector<double> qualities;
  qualities.reserve(neighbors.size());
  for (const auto& n : neighbors) qualities.push_back(corpus[n.index].quality);
  std::sort(qualities.begin(), qualities.end());
  const double mean =
      std::accumulate(qualities.begin(), qualities.end(), 0.0) / count;
  p.estimate = std::clamp(mean, qualities.front(), qualities.back());
  return p;
}

std::vector<Neighbor> find_neighbors(const Document& candidate,
                                     std::span<const ScoredExample> train,
                                     const EstimatorConfig& config) {
  const Kernel kernel(config);
  std::vector<std::size_t> indices(train.size());
  std::vector<double> scores(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    indices[i] = i;
    scores[i] = kernel(candidate, train[i].doc);
  }
  return select_neighbors(train, indices, scores, config.tau);
}

Prediction estimate(const Document& candidate,
                    std::span<const ScoredExample> train,
                    const EstimatorConfig& config) {
  config.validate();
  const Kernel kernel(config);
  const auto indices = training_indices(train.size(), {}, config, candidate.id);
  std::vector<double> scores;
  scores.reserve(indices.size());
  for (std::size_t i : indices) scores.push_back(kernel(candidate, train[i].doc));
  const auto neighbors = select_neighbors(train, indices, scores, config.tau);
  return decide(train, neighbors, indices.size(), config);
}

double coverage(std::span<const Prediction> predictions) {
  if (predictions.empty()) {
    throw std::invalid_argument("coverage of an empty prediction list");
  }
  const auto defined = std::count_if(predictions.begin(), predictions.end(),
                                     [](const Prediction& p) { return p.defined(); });
  return static_cast<double>(defined) / static_cast<double>(predictions.size());
}

}  // namespace nnq
