#pragma once

#include <iosfwd>

namespace toff {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInputError = 2,
  kExitValidationBreach = 3,
};

/// Runs the `toffload` command line. Results go to `out` unless --output is
/// given; diagnostics go to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace toff
