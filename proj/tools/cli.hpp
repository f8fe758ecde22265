#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace magnetic_gaps::cli {

constexpr int kExitOk = 0;
constexpr int kExitGapViolation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

// args[0] is the program name. Returns the process exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magnetic_gaps::cli
