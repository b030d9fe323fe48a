#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace p2pq::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInvalidInput = 2,
  kUnstable = 3,
  kNumericalFailure = 4,
};

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace p2pq::cli
