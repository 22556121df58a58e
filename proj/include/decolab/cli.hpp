#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace decolab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 2,     ///< bad flags, config or I/O
  kExitNumerical = 3,   ///< numerical failure, including a failed verify
  kExitProtocol = 4,    ///< two-mode protocol not applicable
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decolab::cli
