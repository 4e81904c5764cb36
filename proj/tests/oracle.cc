#include "oracle.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "nnq/stemmer.h"

namespace nnq::oracle {

std::vector<Tokens> ngram_list(const Tokens& tokens, int n) {
  std::vector<Tokens> out;
  for (int i = 0; i + n <= static_cast<int>(tokens.size()); ++i) {
    out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
  }
  return out;
}

int matched_occurrences(const Tokens& x, const Tokens& s, int n) {
  const auto xs = ngram_list(x, n);
  const auto ss = ngram_list(s, n);
  std::vector<bool> used(ss.size(), false);
  int matched = 0;
  for (const auto& g : xs) {
    for (std::size_t j = 0; j < ss.size(); ++j) {
      if (!used[j] && ss[j] == g) {
        used[j] = true;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

std::optional<double> precision(const Tokens& x, const Tokens& s, int n,
                                const SmoothingPolicy& smoothing) {
  const auto total = static_cast<double>(ngram_list(x, n).size());
  if (total == 0) return std::nullopt;
  const double m = matched_occurrences(x, s, n);
  if (n >= 2 && smoothing.mode == SmoothingMode::kAddOne) {
    return (m + 1) / (total + 1);
  }
  if (n >= 2 && smoothing.mode == SmoothingMode::kEpsilon && m == 0) {
    return smoothing.epsilon / total;
  }
  return m / total;
}

std::optional<double> recall(const Tokens& x, const Tokens& s, int n) {
  const auto total = static_cast<double>(ngram_list(s, n).size());
  if (total == 0) return std::nullopt;
  return matched_occurrences(x, s, n) / total;
}

std::optional<double> brevity(const Tokens& x, const Tokens& s) {
  if (x.empty()) return std::nullopt;
  const double exponent =
      1.0 - static_cast<double>(s.size()) / static_cast<double>(x.size());
  return exponent < 0 ? std::exp(exponent) : 1.0;
}

namespace {

double geometric_bleu(const Tokens& x, const Tokens& s,
                      const SmoothingPolicy& sm, int first) {
  if (static_cast<int>(x.size()) < 4) return 0.0;
  double product = 1.0;
  for (int n = first; n <= 4; ++n) {
    const auto p = precision(x, s, n, sm);
    if (!p || *p == 0.0) return 0.0;
    product *= *p;
  }
  const double orders = 4 - first + 1;
  return *brevity(x, s) * std::pow(product, 1.0 / orders);
}

}  // namespace

double bleu_star(const Tokens& x, const Tokens& s, const SmoothingPolicy& sm) {
  return geometric_bleu(x, s, sm, 2);
}

double bleu4(const Tokens& x, const Tokens& s, const SmoothingPolicy& sm) {
  return geometric_bleu(x, s, sm, 1);
}

std::size_t lcs(const Tokens& x, const Tokens& s) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go =
      [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == x.size() || j == s.size()) return 0;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v =
        x[i] == s[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

double rouge_l(const Tokens& x, const Tokens& s) {
  if (x.empty() || s.empty()) return 0.0;
  const double l = static_cast<double>(lcs(x, s));
  if (l == 0) return 0.0;
  const double p = l / static_cast<double>(x.size());
  const double r = l / static_cast<double>(s.size());
  return 2 * p * r / (p + r);
}

Alignment meteor_alignment(const Tokens& x, const Tokens& s) {
  Tokens xs;
  Tokens ss;
  for (const auto& t : x) xs.push_back(porter_stem(t));
  for (const auto& t : s) ss.push_back(porter_stem(t));

  Alignment best;
  best.chunks = 1 << 30;
  std::vector<int> target(xs.size(), -1);
  std::vector<bool> used(ss.size(), false);
  std::function<void(std::size_t, int)> go = [&](std::size_t i, int matches) {
    // Branches that cannot reach the best match count are cut; this only
    // skips alignments that lose on the first criterion.
    if (matches + static_cast<int>(xs.size() - i) < best.matches) return;
    if (i == xs.size()) {
      int chunks = 0;
      int prev_x = -2;
      int prev_s = -2;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        if (target[k] < 0) continue;
        if (!(static_cast<int>(k) == prev_x + 1 && target[k] == prev_s + 1)) {
          ++chunks;
        }
        prev_x = static_cast<int>(k);
        prev_s = target[k];
      }
      if (matches > best.matches ||
          (matches == best.matches && chunks < best.chunks)) {
        best = {matches, chunks};
      }
      return;
    }
    for (std::size_t j = 0; j < ss.size(); ++j) {
      if (used[j] || xs[i] != ss[j]) continue;
      used[j] = true;
      target[i] = static_cast<int>(j);
      go(i + 1, matches + 1);
      target[i] = -1;
      used[j] = false;
    }
    go(i + 1, matches);
  };
  go(0, 0);
  if (best.matches == 0) best.chunks = 0;
  return best;
}

double meteor(const Tokens& x, const Tokens& s) {
  if (x.empty() || s.empty()) return 0.0;
  const auto a = meteor_alignment(x, s);
  if (a.matches == 0) return 0.0;
  const double p = static_cast<double>(a.matches) / static_cast<double>(x.size());
  const double r = static_cast<double>(a.matches) / static_cast<double>(s.size());
  const double f = p * r / (0.9 * p + 0.1 * r);
  const double frag = static_cast<double>(a.chunks) / a.matches;
  return f * (1 - 0.5 * frag * frag * frag);
}

double kernel(KernelKind kind, const Tokens& x, const Tokens& s,
              const SmoothingPolicy& sm) {
  switch (kind) {
    case KernelKind::kBleuStar:
      return bleu_star(x, s, sm);
    case KernelKind::kBleu4:
      return bleu4(x, s, sm);
    case KernelKind::kRougeL:
      return rouge_l(x, s);
    case KernelKind::kMeteorLite:
      return meteor(x, s);
    case KernelKind::kExternal:
      break;
  }
  return 0.0;
}

std::optional<double> estimate(const Tokens& x,
                               const std::vector<OracleItem>& train,
                               const EstimatorConfig& config,
                               std::size_t* neighbor_count) {
  std::vector<double> qualities;
  for (const auto& item : train) {
    if (kernel(config.kernel, x, item.tokens, config.smoothing) >= config.tau) {
      qualities.push_back(item.quality);
    }
  }
  if (neighbor_count) *neighbor_count = qualities.size();
  const double size = static_cast<double>(qualities.size());
  if (size < config.min_neighbors) return std::nullopt;
  if (size > config.max_neighbor_frac * static_cast<double>(train.size())) {
    return std::nullopt;
  }
  // Wide accumulator, then the bound every mean satisfies; identical
  // qualities therefore average to exactly that value.
  long double total = 0.0L;
  for (double q : qualities) total += q;
  const auto [lo, hi] = std::minmax_element(qualities.begin(), qualities.end());
  return std::clamp(static_cast<double>(total / qualities.size()), *lo, *hi);
}

LooResult leave_one_out(const std::vector<OracleItem>& items,
                        const EstimatorConfig& config) {
  LooResult result;
  std::vector<double> predicted;
  std::vector<double> truths;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::vector<OracleItem> rest;
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (j != i) rest.push_back(items[j]);
    }
    const auto e = estimate(items[i].tokens, rest, config);
    result.estimates.push_back(e);
    if (e) {
      predicted.push_back(*e);
      truths.push_back(items[i].quality);
    }
  }
  result.coverage =
      static_cast<double>(predicted.size()) / static_cast<double>(items.size());
  if (predicted.size() >= 3) result.rho = spearman_by_counting(predicted, truths);
  return result;
}

double spearman_no_ties(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  auto rank_of = [](const std::vector<double>& v, std::size_t i) {
    double r = 1;
    for (double w : v) {
      if (w < v[i]) ++r;
    }
    return r;
  };
  double d2 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = rank_of(xs, i) - rank_of(ys, i);
    d2 += d * d;
  }
  return 1 - 6 * d2 / (n * (n * n - 1));
}

std::optional<double> spearman_by_counting(const std::vector<double>& xs,
                                           const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0;
      double equal = 0;
      for (double w : v) {
        if (w < v[i]) ++below;
        if (w == v[i]) ++equal;
      }
      r[i] = below + (equal + 1) / 2;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const auto n = static_cast<double>(xs.size());
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<OracleItem> from_examples(const std::vector<ScoredExample>& items) {
  std::vector<OracleItem> out;
  for (const auto& ex : items) {
    out.push_back({ex.id(), ex.doc.tokens.tokens, ex.quality});
  }
  return out;
}

}  // namespace nnq::oracle
