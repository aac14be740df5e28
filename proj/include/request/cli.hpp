#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace request {

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 2 on usage errors and 1 when a pipeline stage fails.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace request
