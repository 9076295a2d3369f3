#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scene_analogy::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kDegenerate = 3,
    kUnreachable = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scene_analogy::cli
