#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wmc {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitParams = 3,
  kExitFailure = 4,
  kExitTimeout = 5,
};

/// Runs one command line (without the program name). Results go to `out`; diagnostics,
/// wall times and errors go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wmc
