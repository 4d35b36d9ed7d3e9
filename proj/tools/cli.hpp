#pragma once

#include <iosfwd>

namespace robl1::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCap = 4;

/// Parses argv, runs one subcommand and maps failures to exit codes. Diagnostics go to
/// `err` as a single line.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace robl1::cli
