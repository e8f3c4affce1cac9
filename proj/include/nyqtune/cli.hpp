#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace nyqtune::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 runtime failure, 2 usage error (usage text goes to `err`).
int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace nyqtune::cli
