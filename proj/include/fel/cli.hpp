#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fel::cli {

enum ExitCode : int {
  kOk = 0,
  kConditionViolation = 1,
  kNumericalFailure = 2,
  kInputError = 3,
};

/// Runs one subcommand (describe | solve-ndhs | energy | lipschitz | equivalence | render).
/// `args` excludes the program name. Results go to `out` (or the --output file),
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "m0..n" (or a single level "n", meaning 0..n).
std::pair<int, int> parse_level_range(const std::string& text);

}  // namespace fel::cli
