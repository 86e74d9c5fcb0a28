#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cprfit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitInternal = 4;

inline constexpr const char *kToolVersion = "0.1.0";

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Diagnostics go to `err`, informational text to `out`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace cprfit::cli
