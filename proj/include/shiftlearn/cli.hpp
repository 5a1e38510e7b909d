#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shiftlearn {

/// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "SHIFTLEARN_OUTPUT_DIR";

/// Entry point of the `shiftlearn` tool. args excludes the program name.
/// Returns 0 on success, 2 for usage or configuration errors, 1 otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shiftlearn
