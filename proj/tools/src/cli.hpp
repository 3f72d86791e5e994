#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genokit::cli {

inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Parses `args` (without the program name), runs one subcommand and returns
/// the process exit code. Failures print a single line
/// `error: category=<kind> message=<text>` on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace genokit::cli
