#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vfshm {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Run one invocation. `args` excludes the program name. Never throws; every
/// failure is reported on `err` and mapped to an ExitCode.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vfshm
