#pragma once

#include <string>
#include <vector>

namespace addsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

// Parses and dispatches one command line (without the program name).
// Results go to the files named by the flags; diagnostics go to stderr.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace addsel::cli
