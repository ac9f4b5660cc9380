#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bcpp {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCheckFailed = 2, kExitInternal = 3 };

// Runs one subcommand. args excludes the program name. A structured JSON log
// line goes to err for every run.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::vector<std::string> subcommand_names();

}  // namespace bcpp
