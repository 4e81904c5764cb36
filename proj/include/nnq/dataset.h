#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnq/estimator.h"

namespace nnq {

// Malformed or out-of-range input. `line` is 1-based, 0 when not tied to a
// line.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(int line, const std::string& message);
  // Prefixes `context` (typically a path) to an existing error.
  DatasetError(const std::string& context, const DatasetError& inner);
  int line() const { return line_; }

 private:
  int line_;
};

struct LoadOptions {
  // Raw scale used when a record does not carry one.
  double default_scale = 1.0;
  // Allow records without any score (candidates to be scored). Their
  // quality is set to 0.
  bool allow_unscored = false;
};

// Line-delimited JSON, one object per line:
//   {"id": "d1", "text": "...", "score": 3, "scale": 5,
//    "annotator_scores": [5, null, 3] | {"ann7": 4},
//    "task": "dialogue", "topic": "3"}
// A record without "id" gets "line-<n>". When "score" is absent the mean of
// the annotator scores is used. The normalized quality is score / scale.
// Blank lines are skipped.
std::vector<ScoredExample> parse_jsonl(std::istream& in,
                                       const LoadOptions& options = {});

// Header row with id, text and score columns; topic, task and scale are
// optional. Comma or tab separated, RFC 4180 quoting.
std::vector<ScoredExample> parse_csv(std::istream& in,
                                     const LoadOptions& options = {});

// Dispatches on the extension: .csv / .tsv are tabular, anything else is
// read as JSONL.
std::vector<ScoredExample> load_dataset(const std::filesystem::path& path,
                                        const LoadOptions& options = {});

// Number of sentences, counting runs of . ! ? as terminators; trailing text
// without a terminator counts as a sentence.
std::size_t count_sentences(std::string_view text);

}  // namespace nnq
