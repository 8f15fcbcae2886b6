#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpd::cli {

enum ExitCode : int { kOk = 0, kPartial = 1, kConfigError = 2, kEmptyModel = 3 };

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dpd::cli
