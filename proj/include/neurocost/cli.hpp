#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace neurocost {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitMismatch = 3;

/// Runs one CLI invocation. `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace neurocost
