#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace archspace {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

/// Runs the command line `args` (without the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace archspace
