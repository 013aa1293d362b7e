#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqkd {

/// Exit codes of the experiment runner.
enum ExitCode : int
{
    kExitOk = 0,
    kExitAssertionFailed = 1,
    kExitUsage = 2,
};

/// Environment variable naming the default output directory.
inline constexpr char const* kOutDirEnv = "SQKD_OUT_DIR";

/// Entry point shared by the `sqkd` binary and the tests. `args` excludes
/// the program name.
int run_cli(std::vector<std::string> const& args, std::ostream& out,
            std::ostream& err);

}  // namespace sqkd
