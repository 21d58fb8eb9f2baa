#pragma once

#include <exception>
#include <string>

namespace qoe::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitDivergence = 4,
    kExitTransfer = 5,
};

/// Exit code for an error; the innermost classified nested error decides.
int exit_code_for(const std::exception& e);

/// Messages of an error and all nested causes, joined with ": ".
std::string describe(const std::exception& e);

/// Entry point of the `qoe` tool.
int run_cli(int argc, char** argv);

}  // namespace qoe::cli
