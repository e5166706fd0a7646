#pragma once

#include <iosfwd>

namespace rqgmm::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kFitFailure = 3,
};

// Entry point of the `rqgmm` tool: synth, fit, encode, eval, compare, inspect,
// export. Machine-readable results go to `out` or named files; progress and
// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rqgmm::cli
