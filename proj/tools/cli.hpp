#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlpa::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kNotConverged = 2,
  kNumerical = 3,
};

/// Runs one command line (without the program name). Diagnostics go to
/// `err`; commands that print results (evaluate without --metrics-out)
/// write to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mlpa::cli
