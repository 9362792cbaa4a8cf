#pragma once

#include <string>
#include <vector>

namespace nlforms::cli {

/// Parses and runs one command line (without the program name).
/// Exit codes: 0 success, 2 validation error, 3 inconclusive convergence
/// verdict, 4 failed convergence verdict, 1 internal error.
int run(const std::vector<std::string>& args);

}  // namespace nlforms::cli
