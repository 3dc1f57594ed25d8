#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uqeval::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // computation or validation failure
inline constexpr int kExitUsage = 2;

// Runs the tool on `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Artifacts every `demo` run writes at the top of its output directory.
const std::vector<std::string>& demo_artifacts();

}  // namespace uqeval::cli
