#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mesocloud::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kThresholdExceeded = 1,
  kAdmissibilityError = 2,
  kSolverFailure = 3,
  kOracleFailure = 4,
};

/// Runs one command line (args[0] is the program name) and returns the exit
/// code. Progress and errors are written to log; result files go to --out.
int run(const std::vector<std::string>& args, std::ostream& log);

}  // namespace mesocloud::cli
