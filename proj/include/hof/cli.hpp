#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hof/error.hpp"

namespace hof::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kRuntimeFailure = 3,
};

ExitCode exit_code_for(ErrorCode code);

// Entry point shared by the hofdetect binary and the tests. args excludes
// the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace hof::cli
