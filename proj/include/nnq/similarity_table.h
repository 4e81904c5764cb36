#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace nnq {

class MissingPairError : public std::out_of_range {
 public:
  MissingPairError(std::string missing_id, const std::string& message)
      : std::out_of_range(message), missing_id_(std::move(missing_id)) {}
  const std::string& missing_id() const { return missing_id_; }

 private:
  std::string missing_id_;
};

// Externally computed pairwise similarities (for example from an embedding
// model), keyed by (candidate id, example id).
//
// File format: a header row naming the columns candidate_id, example_id and
// score (any order, comma or tab separated), then one row per pair. Scores
// are decimal reals; values outside [0, 1] are clamped on lookup.
class SimilarityTable {
 public:
  SimilarityTable() = default;

  static SimilarityTable load(const std::filesystem::path& path);
  static SimilarityTable parse(std::istream& in);

  void set(std::string candidate_id, std::string example_id, double score);

  // Throws MissingPairError naming the id that has no entry.
  double lookup(std::string_view candidate_id,
                std::string_view example_id) const;

  std::size_t size() const { return size_; }

 private:
  using Row = std::map<std::string, double, std::less<>>;
  std::map<std::string, Row, std::less<>> rows_;
  std::size_t size_ = 0;
};

double external_similarity(std::string_view candidate_id,
                           std::string_view example_id,
                           const SimilarityTable& table);

}  // namespace nnq
