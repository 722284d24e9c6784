#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace wkam {

/// Exit statuses of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitSuiteFailure = 1,
  kExitInvalid = 2,
  kExitNoConvergence = 3,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  int threads = 1;
  bool overwrite = false;
};

const std::vector<std::string>& command_names();

/// Validates the config, prepares the output directory, runs the command and
/// writes manifest.json. Messages go to `log`, errors to `err`.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log,
                std::ostream& err);

}  // namespace wkam
