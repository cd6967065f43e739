#pragma once

#include <iosfwd>

namespace vtour::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFindings = 1; ///< validation produced error findings
inline constexpr int kUsage = 2;
inline constexpr int kFailure = 3;  ///< I/O or internal error

/// Runs the vtour command line. Normal output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vtour::cli
