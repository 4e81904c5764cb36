#include "nnq/similarity_table.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nnq/csv.h"

namespace nnq {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_score(const std::string& text, int line) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed == 0 || consumed != text.size() || !std::isfinite(value)) {
    throw std::runtime_error("similarity table line " + std::to_string(line) +
                             ": score '" + text + "' is not a decimal number");
  }
  return value;
}

}  // namespace

SimilarityTable SimilarityTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open similarity table " + path.string());
  }
  return parse(in);
}

SimilarityTable SimilarityTable::parse(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("similarity table is empty");
  }
  const char delimiter = sniff_delimiter(header);
  int line = 0;
  std::istringstream header_stream(header);
  const auto columns = read_csv_record(header_stream, delimiter, line);
  int cand_col = -1;
  int ex_col = -1;
  int score_col = -1;
  for (std::size_t i = 0; columns && i < columns->size(); ++i) {
    const auto name = trim((*columns)[i]);
    if (name == "candidate_id") cand_col = static_cast<int>(i);
    if (name == "example_id") ex_col = static_cast<int>(i);
    if (name == "score") score_col = static_cast<int>(i);
  }
  if (cand_col < 0 || ex_col < 0 || score_col < 0) {
    throw std::runtime_error(
        "similarity table header must name candidate_id, example_id and "
        "score columns");
  }
  const auto needed =
      static_cast<std::size_t>(std::max({cand_col, ex_col, score_col}));

  SimilarityTable table;
  line = 1;
  while (auto record = read_csv_record(in, delimiter, line)) {
    if (record->size() == 1 && trim((*record)[0]).empty()) continue;
    if (record->size() <= needed) {
      throw std::runtime_error("similarity table line " +
                               std::to_string(line) + ": expected at least " +
                               std::to_string(needed + 1) + " columns");
    }
    table.set(trim((*record)[cand_col]), trim((*record)[ex_col]),
              parse_score(trim((*record)[score_col]), line));
  }
  return table;
}

void SimilarityTable::set(std::string candidate_id, std::string example_id,
                          double score) {
  auto& row = rows_[std::move(candidate_id)];
  if (row.insert_or_assign(std::move(example_id), score).second) ++size_;
}

double SimilarityTable::lookup(std::string_view candidate_id,
                               std::string_view example_id) const {
  const auto row = rows_.find(candidate_id);
  if (row == rows_.end()) {
    throw MissingPairError(std::string(candidate_id),
                           "similarity table has no entries for candidate '" +
                               std::string(candidate_id) + "'");
  }
  const auto cell = row->second.find(example_id);
  if (cell == row->second.end()) {
    throw MissingPairError(std::string(example_id),
                           "similarity table has no entry for example '" +
                               std::string(example_id) + "' against candidate '" +
                               std::string(candidate_id) + "'");
  }
  return std::clamp(cell->second, 0.0, 1.0);
}

double external_similarity(std::string_view candidate_id,
                           std::string_view example_id,
                           const SimilarityTable& table) {
  return table.lookup(candidate_id, example_id);
}

}  // namespace nnq
