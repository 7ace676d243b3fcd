#pragma once

#include <string>
#include <vector>

#include "locfft/config.hpp"

namespace locfft {

/// Parses argv (flags, then an optional --config file) into a RunConfig.
/// Flags given on the command line win over values from the file.
/// Returns the exit code to use when parsing ends the program (help,
/// version, usage error); std::nullopt otherwise.
struct ParsedArgs {
  RunConfig config;
  std::optional<int> exit_code;
};
ParsedArgs parse_args(int argc, const char* const* argv);

/// Whole command-line program. Exit codes: 0 success, 1 input or usage
/// error, 2 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace locfft
