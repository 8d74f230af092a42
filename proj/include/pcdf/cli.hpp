#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcdf/error.hpp"

namespace pcdf::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kValidationFailure = 3,
};

/// Matrix/model invariant violations map to kValidationFailure, malformed
/// input and bad flags to kInvalidInput, anything else to kFailure.
int exit_code_for(ErrorKind kind) noexcept;

/// Entry point behind the `pcdf` executable. `args` excludes the program
/// name. The JSON report goes to `out`, the human summary and diagnostics
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcdf::cli
