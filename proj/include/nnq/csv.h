#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace nnq {

// Minimal RFC 4180 reader: quoted fields may contain the delimiter, doubled
// quotes and newlines. Returns nullopt at end of input. `line` is advanced by
// the number of physical lines consumed.
std::optional<std::vector<std::string>> read_csv_record(std::istream& in,
                                                        char delimiter,
                                                        int& line);

// Guesses ',' or '\t' from a header line.
char sniff_delimiter(const std::string& header_line);

}  // namespace nnq
