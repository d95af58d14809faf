#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rrcd {

/// Environment variable naming the default configuration directory.
inline constexpr const char* kConfigDirEnv = "RRCD_CONFIG_DIR";

/// Entry point of the rrcd_sim tool. `args` excludes the program name.
/// Returns 0 on success; failures print one JSON object to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace rrcd
