#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nnq {

// Highest n-gram order kept in a profile (BLEU-4).
inline constexpr int kMaxOrder = 4;

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source_id;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// Lowercases ASCII letters, splits on ASCII whitespace and emits every ASCII
// punctuation character as a token of its own. Bytes >= 0x80 (UTF-8
// multibyte sequences) are copied through untouched, so non-ASCII text is
// neither case-folded nor normalized.
TokenSequence tokenize(std::string_view raw_text, std::string source_id = {});

// Joins tokens with a single space. Tokens never contain ASCII whitespace,
// so the key is unambiguous.
std::string ngram_key(std::span<const std::string> tokens);

struct NGramCount {
  std::string key;
  int count = 0;
};

// Multiset of n-grams for orders 1..kMaxOrder. Entries of each order are
// sorted by key, which lets two profiles be intersected with a merge join.
class NGramProfile {
 public:
  NGramProfile() = default;
  explicit NGramProfile(const TokenSequence& seq);

  // `order` is 1-based.
  std::span<const NGramCount> counts(int order) const;
  int total(int order) const;
  int count(int order, std::span<const std::string> ngram) const;

 private:
  std::array<std::vector<NGramCount>, kMaxOrder> counts_;
  std::array<int, kMaxOrder> totals_{};
};

NGramProfile profile(const TokenSequence& seq);

// Sum over distinct n-grams g of min(count_x[g], count_s[g]).
int clipped_matches(const NGramProfile& x, const NGramProfile& s, int order);

// A text together with everything the kernels need, computed once.
struct Document {
  std::string id;
  std::string text;
  TokenSequence tokens;
  NGramProfile profile;
  std::vector<std::string> stems;

  Document() = default;
  Document(std::string id, std::string text);
};

}  // namespace nnq
