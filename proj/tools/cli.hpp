#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace riskstrat::cli {

// Exit statuses of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
};

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace riskstrat::cli
