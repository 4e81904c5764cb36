#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "nnq/text.h"

namespace nnq {

// Every kernel returns a similarity in [0, 1]. Kernels are not symmetric in
// general: the first argument is the candidate, the second the training
// example it is compared against.

enum class SmoothingMode { kNone, kEpsilon, kAddOne };

// How zero n-gram precisions are handled at orders >= 2.
//   kNone     zero precision stays zero.
//   kEpsilon  a zero match count is replaced by `epsilon`.
//   kAddOne   (matches + 1) / (total + 1).
struct SmoothingPolicy {
  SmoothingMode mode = SmoothingMode::kEpsilon;
  double epsilon = 0.1;

  // Throws std::invalid_argument unless 0 < epsilon <= 1 (kEpsilon only).
  void validate() const;

  static SmoothingPolicy none() { return {SmoothingMode::kNone, 0.1}; }
  static SmoothingPolicy add_one() { return {SmoothingMode::kAddOne, 0.1}; }
  static SmoothingPolicy with_epsilon(double eps) {
    return {SmoothingMode::kEpsilon, eps};
  }
};

std::string_view smoothing_name(SmoothingMode mode);
SmoothingMode parse_smoothing(std::string_view name);

// Clipped n-gram precision of x against s. Empty when x has no n-grams of
// this order.
std::optional<double> precision_n(const NGramProfile& x, const NGramProfile& s,
                                  int n,
                                  const SmoothingPolicy& smoothing =
                                      SmoothingPolicy::none());

// Clipped n-gram recall. Empty when s has no n-grams of this order.
std::optional<double> recall_n(const NGramProfile& x, const NGramProfile& s,
                               int n);

// exp(min(0, 1 - |s| / |x|)). Empty when x has no tokens.
std::optional<double> brevity_penalty(const NGramProfile& x,
                                      const NGramProfile& s);

// Brevity penalty times the geometric mean of clipped P2, P3, P4. A
// candidate with fewer than four tokens scores 0.
double bleu_star(const NGramProfile& x, const NGramProfile& s,
                 const SmoothingPolicy& smoothing);

// Sentence-level BLEU-4: brevity penalty times the geometric mean of P1..P4.
double bleu4(const NGramProfile& x, const NGramProfile& s,
             const SmoothingPolicy& smoothing);

std::size_t lcs_length(std::span<const std::string> x,
                       std::span<const std::string> s);

// F-measure of LCS-based precision and recall.
double rouge_l(std::span<const std::string> x, std::span<const std::string> s);
inline double rouge_l(const TokenSequence& x, const TokenSequence& s) {
  return rouge_l(std::span(x.tokens), std::span(s.tokens));
}

struct MeteorAlignment {
  int matches = 0;
  int chunks = 0;
};

// One-to-one unigram alignment over stem sequences (an exact match is also a
// stem match). The alignment has the maximum number of matches and, among
// those, the fewest chunks. The chunk search is exact up to a node budget;
// past it the best alignment found so far is returned.
MeteorAlignment meteor_align(std::span<const std::string> x_stems,
                             std::span<const std::string> s_stems);

inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorGamma = 0.5;
inline constexpr double kMeteorTheta = 3.0;

// Scores pre-stemmed sequences.
double meteor_lite_stems(std::span<const std::string> x_stems,
                         std::span<const std::string> s_stems);
// Stems both sequences with porter_stem() and scores them.
double meteor_lite(const TokenSequence& x, const TokenSequence& s);

}  // namespace nnq
