#pragma once

#include <string>
#include <vector>

namespace aw4re {

// Exit codes: 0 success, 2 usage or config-schema error, 1 runtime error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace aw4re
