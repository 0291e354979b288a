#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace greenbvp::cli {

enum ExitCode : int {
    ok = 0,
    usage = 1,
    condition_failure = 2,
    incompatible = 3,
    divergence = 4,
};

/// Runs the command line `greenbvp <command> [problem-file] [options]`.
///
/// `args` excludes the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greenbvp::cli
