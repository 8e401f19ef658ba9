#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bayesedge
{
    enum ExitCode : int
    {
        exit_ok = 0,
        exit_user_error = 1,
        exit_numerical_failure = 2
    };

    /// Runs one CLI invocation; `args` excludes the program name.
    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
} // namespace bayesedge
