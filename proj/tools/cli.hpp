#pragma once

#include <string>
#include <vector>

namespace lswn::cli {

/// Runs the `lswn` command line. Returns the process exit code: 0 on success,
/// 1 on any error. The test decision never changes the exit code.
int run(int argc, const char* const* argv);

/// Convenience overload; args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace lswn::cli
