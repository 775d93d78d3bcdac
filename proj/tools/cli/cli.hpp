#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInputError = 2,
  kRuntimeError = 3,
};

/// Runs one `sp` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sp::cli
