#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vgrowth::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kIo = 3,
  kNonConvergence = 4,
  kConditionViolated = 5,
};

/// Runs one command; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vgrowth::cli
