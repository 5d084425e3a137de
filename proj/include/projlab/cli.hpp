#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace projlab {

// Exit codes of run_command.
constexpr int kExitOk = 0;
constexpr int kExitBound = 1;
constexpr int kExitUsage = 2;

// args excludes the program name. Reports go to --out-dir, else to the
// directory named by PROJLAB_OUT, else to the working directory.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace projlab
