#pragma once

#include <string>
#include <string_view>

namespace nnq {

// Porter (1980) suffix-stripping stemmer. Words that are not entirely
// lowercase ASCII letters, and words of two letters or fewer, are returned
// unchanged.
std::string porter_stem(std::string_view word);

}  // namespace nnq
