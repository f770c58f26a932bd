#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace motrack {

/// Runs the command-line frontend. `args` excludes the program name. Returns
/// the process exit code: 0 success, 1 usage or configuration problem,
/// 2 data problem, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace motrack
