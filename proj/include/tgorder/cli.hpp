#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tgorder {

// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,  // validate found deviations above tolerance
    kExitUsage = 2,
    kExitParse = 3,
    kExitInvalidInput = 4,  // unknown ids, bad values, unresolvable tasks
    kExitInternal = 5,
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tgorder
