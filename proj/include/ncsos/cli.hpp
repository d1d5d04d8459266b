#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ncsos {

inline constexpr const char* kVersion = "0.3.0";

/// Exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,     // bad flags, unreadable or malformed input
  kExitFailed = 2,    // solver not optimal, or certificate residual above tolerance
  kExitNotMonotone = 3,
};

/// Runs one command; `args` excludes the program name. Everything the user
/// sees goes through `out` and `err`, so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, hex encoded. Used to fingerprint game inputs in reports.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ncsos
