#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace truelearn {

struct CliEnv {
  /// ANSI colour in human-readable output.
  bool color = false;
};

/// Colour is on for a terminal unless NO_COLOR is set.
CliEnv detect_env();

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage error, 2 data error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnv& env = {});

}  // namespace truelearn
