#include "nnq/text.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "nnq/stemmer.h"

namespace nnq {
namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

void check_order(int order) {
  if (order < 1 || order > kMaxOrder) {
    throw std::out_of_range("n-gram order must be in 1.." +
                            std::to_string(kMaxOrder) + ", got " +
                            std::to_string(order));
  }
}

}  // namespace

TokenSequence tokenize(std::string_view raw_text, std::string source_id) {
  TokenSequence seq;
  seq.source_id = std::move(source_id);
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      seq.tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char ch : raw_text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      seq.tokens.emplace_back(1, ch);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return seq;
}

std::string ngram_key(std::span<const std::string> tokens) {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) key.push_back(' ');
    key += tokens[i];
  }
  return key;
}

NGramProfile::NGramProfile(const TokenSequence& seq) {
  const auto& toks = seq.tokens;
  for (int n = 1; n <= kMaxOrder; ++n) {
    if (toks.size() < static_cast<std::size_t>(n)) continue;
    std::map<std::string, int> tally;
    const std::size_t windows = toks.size() - n + 1;
    for (std::size_t i = 0; i < windows; ++i) {
      ++tally[ngram_key(std::span(toks).subspan(i, n))];
    }
    auto& out = counts_[n - 1];
    out.reserve(tally.size());
    for (auto& [key, count] : tally) out.push_back({key, count});
    totals_[n - 1] = static_cast<int>(windows);
  }
}

std::span<const NGramCount> NGramProfile::counts(int order) const {
  check_order(order);
  return counts_[order - 1];
}

int NGramProfile::total(int order) const {
  check_order(order);
  return totals_[order - 1];
}

int NGramProfile::count(int order, std::span<const std::string> ngram) const {
  check_order(order);
  if (ngram.size() != static_cast<std::size_t>(order)) return 0;
  const auto key = ngram_key(ngram);
  const auto& entries = counts_[order - 1];
  auto it = std::lower_bound(
      entries.begin(), entries.end(), key,
      [](const NGramCount& e, const std::string& k) { return e.key < k; });
  return (it != entries.end() && it->key == key) ? it->count : 0;
}

NGramProfile profile(const TokenSequence& seq) { return NGramProfile(seq); }

int clipped_matches(const NGramProfile& x, const NGramProfile& s, int order) {
  const auto xs = x.counts(order);
  const auto ss = s.counts(order);
  int matches = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xs.size() && j < ss.size()) {
    const int cmp = xs[i].key.compare(ss[j].key);
    if (cmp == 0) {
      matches += std::min(xs[i].count, ss[j].count);
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return matches;
}

Document::Document(std::string doc_id, std::string raw)
    : id(std::move(doc_id)), text(std::move(raw)) {
  tokens = tokenize(text, id);
  profile = NGramProfile(tokens);
  stems.reserve(tokens.size());
  for (const auto& t : tokens.tokens) stems.push_back(porter_stem(t));
}

}  // namespace nnq
