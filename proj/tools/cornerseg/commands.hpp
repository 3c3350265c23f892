#pragma once

#include <iosfwd>

namespace cornerseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

/// Parses the command line and runs one subcommand. Returns 0 on success,
/// 1 for invalid input or configuration, 2 for file-system failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cornerseg::cli
