#pragma once

#include <ostream>

namespace relaynet::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNoFeasible = 3,
  kNothingPassedCl = 4,
};

/// Entry point shared by the executable and the tests. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Flag value if positive, else RELAYNET_THREADS, else 1; never above
/// RELAYNET_THREADS when that is set.
int thread_count(int flag);

}  // namespace relaynet::cli
