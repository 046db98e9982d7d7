#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plume::cli {

/// Exit codes of the `plume_bench` front end.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kNumericalError = 3,
  kIoError = 4,
  kDomainError = 5,
};

/// Runs one subcommand. `args` excludes the program name. Errors are
/// reported on `err` as a single JSON line and mapped to an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plume::cli
