#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bitr::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kToleranceFailed = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kRuntimeError = 3;

// Runs one subcommand; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bitr::cli
