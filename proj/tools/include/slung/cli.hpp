#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace slung::cli {

// Entry point shared by the `slung` binary and the tests. args[0] is the
// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slung::cli
