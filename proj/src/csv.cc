#include "nnq/csv.h"

#include <algorithm>

namespace nnq {

std::optional<std::vector<std::string>> read_csv_record(std::istream& in,
                                                        char delimiter,
                                                        int& line) {
  if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  ++line;
  for (int raw = in.get(); raw != std::char_traits<char>::eof();
       raw = in.get()) {
    const char c = static_cast<char>(raw);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

char sniff_delimiter(const std::string& header_line) {
  const auto tabs = std::count(header_line.begin(), header_line.end(), '\t');
  const auto commas = std::count(header_line.begin(), header_line.end(), ',');
  return tabs > commas ? '\t' : ',';
}

}  // namespace nnq
