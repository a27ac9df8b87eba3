#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hidalgo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Returns one of the kExit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hidalgo::cli
