#ifndef OBA_CLI_HPP
#define OBA_CLI_HPP

#include <string>
#include <vector>

namespace oba::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

/// Runs one `oba` subcommand. Diagnostics go to stderr; results only to files.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace oba::cli

#endif  // OBA_CLI_HPP
