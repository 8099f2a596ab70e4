#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace naggs::cli {

/// Exit codes of the experiment runner.
enum ExitCode : int { kSuccess = 0, kNumericalFailure = 1, kConfigError = 2 };

/// Runs the CLI on `args` (without the program name). Human-readable progress goes to
/// `log` unless --quiet is given; diagnostics always go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace naggs::cli
