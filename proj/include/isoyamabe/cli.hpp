#pragma once

#include <iosfwd>

namespace isoyamabe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kDefaultGrid = 2000;

/// Runs the command line `argv` writing results to `out` and diagnostics to
/// `err`; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace isoyamabe::cli
