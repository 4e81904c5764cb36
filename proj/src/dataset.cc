#include "nnq/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "nnq/csv.h"

namespace nnq {

using json = nlohmann::json;

DatasetError::DatasetError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                  : message),
      line_(line) {}

DatasetError::DatasetError(const std::string& context, const DatasetError& inner)
    : std::runtime_error(context + ": " + inner.what()), line_(inner.line()) {}

namespace {

struct RawRecord {
  std::string id;
  std::string text;
  std::optional<double> score;
  std::optional<double> scale;
  std::vector<AnnotatorScore> annotators;
  std::optional<std::string> task;
  std::optional<std::string> topic;
};

std::string scalar_to_string(const json& v, const char* field, int line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  throw DatasetError(line, std::string("field '") + field +
                               "' must be a string or an integer");
}

double number(const json& v, const std::string& field, int line) {
  if (!v.is_number()) {
    throw DatasetError(line, "field '" + field + "' must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw DatasetError(line, "field '" + field + "' is not finite");
  }
  return d;
}

std::optional<std::string> optional_tag(const json& obj, const char* field,
                                        int line) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return scalar_to_string(*it, field, line);
}

double parse_decimal(const std::string& text, const std::string& field,
                     int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(value)) {
    throw DatasetError(line, "field '" + field + "' value '" + text +
                                 "' is not a number");
  }
  return value;
}

ScoredExample finish(RawRecord raw, int line, const LoadOptions& options) {
  const double scale = raw.scale.value_or(options.default_scale);
  if (!(scale > 0.0)) {
    throw DatasetError(line, "scale must be positive");
  }
  for (const auto& a : raw.annotators) {
    if (a.raw < 0.0 || a.raw > scale) {
      throw DatasetError(line, "annotator '" + a.annotator + "' score " +
                                   std::to_string(a.raw) + " outside [0, " +
                                   std::to_string(scale) + "]");
    }
  }
  std::optional<double> score = raw.score;
  if (!score && !raw.annotators.empty()) {
    double total = 0.0;
    for (const auto& a : raw.annotators) total += a.raw;
    score = total / static_cast<double>(raw.annotators.size());
  }
  if (!score && !options.allow_unscored) {
    throw DatasetError(line, "record '" + raw.id +
                                 "' has neither a score nor annotator scores");
  }
  if (score && (*score < 0.0 || *score > scale)) {
    throw DatasetError(line, "score " + std::to_string(*score) +
                                 " outside [0, " + std::to_string(scale) + "]");
  }
  ScoredExample ex;
  ex.doc = Document(std::move(raw.id), std::move(raw.text));
  ex.quality = score ? std::clamp(*score / scale, 0.0, 1.0) : 0.0;
  ex.scale = scale;
  ex.annotator_scores = std::move(raw.annotators);
  ex.task = std::move(raw.task);
  ex.topic = std::move(raw.topic);
  return ex;
}

RawRecord parse_json_record(const std::string& line_text, int line) {
  json obj;
  try {
    obj = json::parse(line_text);
  } catch (const json::parse_error& e) {
    throw DatasetError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DatasetError(line, "record is not a JSON object");

  RawRecord raw;
  const auto id = obj.find("id");
  raw.id = id == obj.end() || id->is_null() ? "line-" + std::to_string(line)
                                            : scalar_to_string(*id, "id", line);
  const auto text = obj.find("text");
  if (text == obj.end() || !text->is_string()) {
    throw DatasetError(line, "missing or non-string 'text'");
  }
  raw.text = text->get<std::string>();
  if (auto it = obj.find("score"); it != obj.end() && !it->is_null()) {
    raw.score = number(*it, "score", line);
  }
  if (auto it = obj.find("scale"); it != obj.end() && !it->is_null()) {
    raw.scale = number(*it, "scale", line);
  }
  if (auto it = obj.find("annotator_scores"); it != obj.end() && !it->is_null()) {
    if (it->is_array()) {
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto& v = (*it)[k];
        if (v.is_null()) continue;
        raw.annotators.push_back(
            {std::to_string(k), number(v, "annotator_scores", line)});
      }
    } else if (it->is_object()) {
      for (const auto& [name, v] : it->items()) {
        if (v.is_null()) continue;
        raw.annotators.push_back({name, number(v, "annotator_scores", line)});
      }
    } else {
      throw DatasetError(line, "'annotator_scores' must be an array or object");
    }
  }
  raw.task = optional_tag(obj, "task", line);
  raw.topic = optional_tag(obj, "topic", line);
  return raw;
}

void check_unique(const std::string& id, int line, std::set<std::string>& seen) {
  if (!seen.insert(id).second) {
    throw DatasetError(line, "duplicate id '" + id + "'");
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<ScoredExample> parse_jsonl(std::istream& in,
                                       const LoadOptions& options) {
  std::vector<ScoredExample> out;
  std::set<std::string> seen;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    auto raw = parse_json_record(text, line);
    check_unique(raw.id, line, seen);
    out.push_back(finish(std::move(raw), line, options));
  }
  return out;
}

std::vector<ScoredExample> parse_csv(std::istream& in,
                                     const LoadOptions& options) {
  std::string header;
  if (!std::getline(in, header)) throw DatasetError(0, "CSV input is empty");
  const char delimiter = sniff_delimiter(header);
  int line = 0;
  std::istringstream header_stream(header);
  const auto names = read_csv_record(header_stream, delimiter, line);
  int id_col = -1, text_col = -1, score_col = -1, topic_col = -1,
      task_col = -1, scale_col = -1;
  for (std::size_t i = 0; names && i < names->size(); ++i) {
    const auto name = trim((*names)[i]);
    const int col = static_cast<int>(i);
    if (name == "id") id_col = col;
    if (name == "text") text_col = col;
    if (name == "score") score_col = col;
    if (name == "topic") topic_col = col;
    if (name == "task") task_col = col;
    if (name == "scale") scale_col = col;
  }
  if (id_col < 0 || text_col < 0 || (score_col < 0 && !options.allow_unscored)) {
    throw DatasetError(1, "CSV header must name id, text and score columns");
  }

  std::vector<ScoredExample> out;
  std::set<std::string> seen;
  line = 1;
  while (true) {
    const int record_line = line + 1;
    auto fields = read_csv_record(in, delimiter, line);
    if (!fields) break;
    if (fields->size() == 1 && trim((*fields)[0]).empty()) continue;
    auto cell = [&](int col) -> std::optional<std::string> {
      if (col < 0) return std::nullopt;
      if (static_cast<std::size_t>(col) >= fields->size()) {
        throw DatasetError(record_line, "too few columns");
      }
      return (*fields)[col];
    };
    RawRecord raw;
    raw.id = trim(*cell(id_col));
    if (raw.id.empty()) throw DatasetError(record_line, "empty id");
    raw.text = *cell(text_col);
    if (auto s = cell(score_col); s && !trim(*s).empty()) {
      raw.score = parse_decimal(trim(*s), "score", record_line);
    }
    if (auto s = cell(scale_col); s && !trim(*s).empty()) {
      raw.scale = parse_decimal(trim(*s), "scale", record_line);
    }
    if (auto s = cell(topic_col); s && !trim(*s).empty()) raw.topic = trim(*s);
    if (auto s = cell(task_col); s && !trim(*s).empty()) raw.task = trim(*s);
    check_unique(raw.id, record_line, seen);
    out.push_back(finish(std::move(raw), record_line, options));
  }
  return out;
}

std::vector<ScoredExample> load_dataset(const std::filesystem::path& path,
                                        const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(0, "cannot open dataset " + path.string());
  const auto ext = path.extension().string();
  try {
    if (ext == ".csv" || ext == ".tsv") return parse_csv(in, options);
    return parse_jsonl(in, options);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string(), e);
  }
}

std::size_t count_sentences(std::string_view text) {
  std::size_t count = 0;
  bool pending = false;
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      if (pending) ++count;
      pending = false;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      pending = true;
    }
  }
  return count + (pending ? 1 : 0);
}

}  // namespace nnq
