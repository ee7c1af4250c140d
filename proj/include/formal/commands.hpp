#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace formal {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point of the command-line tool. `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace formal
