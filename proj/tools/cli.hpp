#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtwreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line (without the program name) and returns the exit code.
/// Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtwreg::cli
