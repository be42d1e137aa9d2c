#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace daa {

/// Exit statuses of the `daa` tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_partial_failure = 1,
  exit_usage = 2,
};

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace daa
