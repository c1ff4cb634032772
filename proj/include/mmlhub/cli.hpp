#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mmlhub {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

/// Runs one command line (without the program name). Machine output goes to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmlhub
