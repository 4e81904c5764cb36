#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace nnq {

// Entry point behind the `nnq` executable. `args` excludes the program name.
// Returns the process exit status: 0 on success, 1 on runtime errors, 2 on
// usage errors.
int run_command(std::span<const std::string> args, std::ostream& out,
                std::ostream& err);

// Parses "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace nnq
