#include "nnq/kernels.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nnq/stemmer.h"

namespace nnq {

void SmoothingPolicy::validate() const {
  if (mode == SmoothingMode::kEpsilon && !(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("smoothing epsilon must be in (0, 1], got " +
                                std::to_string(epsilon));
  }
}

std::string_view smoothing_name(SmoothingMode mode) {
  switch (mode) {
    case SmoothingMode::kNone:
      return "none";
    case SmoothingMode::kEpsilon:
      return "epsilon";
    case SmoothingMode::kAddOne:
      return "add-one";
  }
  return "unknown";
}

SmoothingMode parse_smoothing(std::string_view name) {
  if (name == "none") return SmoothingMode::kNone;
  if (name == "epsilon") return SmoothingMode::kEpsilon;
  if (name == "add-one" || name == "add_one") return SmoothingMode::kAddOne;
  throw std::invalid_argument("unknown smoothing mode '" + std::string(name) +
                              "' (expected none, epsilon or add-one)");
}

std::optional<double> precision_n(const NGramProfile& x, const NGramProfile& s,
                                  int n, const SmoothingPolicy& smoothing) {
  const int total = x.total(n);
  if (total == 0) return std::nullopt;
  const int matches = clipped_matches(x, s, n);
  if (n >= 2) {
    switch (smoothing.mode) {
      case SmoothingMode::kEpsilon:
        if (matches == 0) return smoothing.epsilon / total;
        break;
      case SmoothingMode::kAddOne:
        return (matches + 1.0) / (total + 1.0);
      case SmoothingMode::kNone:
        break;
    }
  }
  return static_cast<double>(matches) / total;
}

std::optional<double> recall_n(const NGramProfile& x, const NGramProfile& s,
                               int n) {
  const int total = s.total(n);
  if (total == 0) return std::nullopt;
  return static_cast<double>(clipped_matches(x, s, n)) / total;
}

std::optional<double> brevity_penalty(const NGramProfile& x,
                                      const NGramProfile& s) {
  const int cand_len = x.total(1);
  if (cand_len == 0) return std::nullopt;
  const double ratio = static_cast<double>(s.total(1)) / cand_len;
  return std::exp(std::min(0.0, 1.0 - ratio));
}

namespace {

// Product of P_first..P_4, or nullopt if any order is undefined.
std::optional<double> precision_product(const NGramProfile& x,
                                        const NGramProfile& s, int first,
                                        const SmoothingPolicy& smoothing) {
  double product = 1.0;
  for (int n = first; n <= kMaxOrder; ++n) {
    const auto p = precision_n(x, s, n, smoothing);
    if (!p) return std::nullopt;
    product *= *p;
  }
  return product;
}

}  // namespace

double bleu_star(const NGramProfile& x, const NGramProfile& s,
                 const SmoothingPolicy& smoothing) {
  const auto product = precision_product(x, s, 2, smoothing);
  if (!product || *product <= 0.0) return 0.0;
  return *brevity_penalty(x, s) * std::cbrt(*product);
}

double bleu4(const NGramProfile& x, const NGramProfile& s,
             const SmoothingPolicy& smoothing) {
  const auto product = precision_product(x, s, 1, smoothing);
  if (!product || *product <= 0.0) return 0.0;
  return *brevity_penalty(x, s) * std::pow(*product, 0.25);
}

std::size_t lcs_length(std::span<const std::string> x,
                       std::span<const std::string> s) {
  std::vector<std::size_t> prev(s.size() + 1, 0);
  std::vector<std::size_t> cur(s.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= s.size(); ++j) {
      cur[j] = x[i - 1] == s[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[s.size()];
}

double rouge_l(std::span<const std::string> x,
               std::span<const std::string> s) {
  if (x.empty() || s.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(x, s));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(x.size());
  const double recall = lcs / static_cast<double>(s.size());
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

constexpr long kMeteorNodeBudget = 2'000'000;

// Branch and bound over x positions in order. Each position is either
// aligned to a free s position with the same stem or left unaligned; every
// stem class must end with exactly min(count_x, count_s) alignments, which
// is the maximum matching. Maximizing adjacent pairs (i, j) -> (i+1, j+1)
// minimizes chunks, since chunks = matches - adjacencies.
class MeteorSearch {
 public:
  MeteorSearch(std::span<const std::string> x, std::span<const std::string> s)
      : nx_(static_cast<int>(x.size())), ns_(static_cast<int>(s.size())) {
    std::unordered_map<std::string_view, int> ids;
    auto id_of = [&](std::string_view stem) {
      auto [it, inserted] = ids.emplace(stem, static_cast<int>(ids.size()));
      return it->second;
    };
    x_class_.reserve(nx_);
    s_class_.reserve(ns_);
    for (const auto& t : x) x_class_.push_back(id_of(t));
    for (const auto& t : s) s_class_.push_back(id_of(t));
    const std::size_t classes = ids.size();
    s_positions_.resize(classes);
    for (int j = 0; j < ns_; ++j) s_positions_[s_class_[j]].push_back(j);
    x_left_.assign(classes, 0);
    for (int c : x_class_) ++x_left_[c];
    quota_.assign(classes, 0);
    for (std::size_t c = 0; c < classes; ++c) {
      quota_[c] = std::min<int>(x_left_[c], s_positions_[c].size());
      matches_ += quota_[c];
    }
    // adjacency_possible_suffix_[i]: upper bound on adjacencies formed at
    // positions i..nx-1.
    adjacency_possible_suffix_.assign(nx_ + 1, 0);
    for (int i = nx_ - 1; i >= 1; --i) {
      bool possible = false;
      for (int j : s_positions_[x_class_[i]]) {
        if (j >= 1 && s_class_[j - 1] == x_class_[i - 1]) {
          possible = true;
          break;
        }
      }
      adjacency_possible_suffix_[i] =
          adjacency_possible_suffix_[i + 1] + (possible ? 1 : 0);
    }
    used_.assign(ns_, false);
    aligned_to_.assign(nx_, -1);
  }

  MeteorAlignment run() {
    if (matches_ == 0) return {};
    dfs(0, 0);
    return {matches_, matches_ - best_adjacent_};
  }

 private:
  void dfs(int i, int adjacent) {
    if (best_adjacent_ == matches_ - 1) return;  // one chunk, optimal
    if (++nodes_ > kMeteorNodeBudget && best_adjacent_ >= 0) return;
    if (i == nx_) {
      best_adjacent_ = std::max(best_adjacent_, adjacent);
      return;
    }
    const int bound = std::min(
        matches_ - 1, adjacent + adjacency_possible_suffix_[std::max(i, 1)]);
    if (bound <= best_adjacent_) return;

    const int c = x_class_[i];
    const int prev = i > 0 ? aligned_to_[i - 1] : -1;
    --x_left_[c];
    if (quota_[c] > 0) {
      --quota_[c];
      // Extending the previous alignment diagonally is tried first.
      const int diagonal = prev >= 0 ? prev + 1 : -1;
      if (diagonal >= 0 && diagonal < ns_ && !used_[diagonal] &&
          s_class_[diagonal] == c) {
        assign(i, diagonal, adjacent + 1);
      }
      for (int j : s_positions_[c]) {
        if (j == diagonal || used_[j]) continue;
        assign(i, j, adjacent);
      }
      ++quota_[c];
    }
    if (x_left_[c] >= quota_[c]) dfs(i + 1, adjacent);
    ++x_left_[c];
  }

  void assign(int i, int j, int adjacent) {
    used_[j] = true;
    aligned_to_[i] = j;
    dfs(i + 1, adjacent);
    aligned_to_[i] = -1;
    used_[j] = false;
  }

  int nx_;
  int ns_;
  std::vector<int> x_class_;
  std::vector<int> s_class_;
  std::vector<std::vector<int>> s_positions_;
  std::vector<int> x_left_;
  std::vector<int> quota_;
  std::vector<int> adjacency_possible_suffix_;
  std::vector<bool> used_;
  std::vector<int> aligned_to_;
  int matches_ = 0;
  int best_adjacent_ = -1;
  long nodes_ = 0;
};

}  // namespace

MeteorAlignment meteor_align(std::span<const std::string> x_stems,
                             std::span<const std::string> s_stems) {
  return MeteorSearch(x_stems, s_stems).run();
}

double meteor_lite_stems(std::span<const std::string> x_stems,
                         std::span<const std::string> s_stems) {
  if (x_stems.empty() || s_stems.empty()) return 0.0;
  const auto alignment = meteor_align(x_stems, s_stems);
  if (alignment.matches == 0) return 0.0;
  const double m = alignment.matches;
  const double precision = m / static_cast<double>(x_stems.size());
  const double recall = m / static_cast<double>(s_stems.size());
  const double f_mean = precision * recall /
                        (kMeteorAlpha * precision + (1.0 - kMeteorAlpha) * recall);
  const double penalty =
      kMeteorGamma * std::pow(alignment.chunks / m, kMeteorTheta);
  return f_mean * (1.0 - penalty);
}

double meteor_lite(const TokenSequence& x, const TokenSequence& s) {
  std::vector<std::string> xs;
  std::vector<std::string> ss;
  xs.reserve(x.size());
  ss.reserve(s.size());
  for (const auto& t : x.tokens) xs.push_back(porter_stem(t));
  for (const auto& t : s.tokens) ss.push_back(porter_stem(t));
  return meteor_lite_stems(xs, ss);
}

}  // namespace nnq
