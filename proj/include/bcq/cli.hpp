#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bcq::cli {

inline constexpr const char* kToolVersion = "bcq 1.0.0";

// Batch front door used by both the binary and the tests. Writes the
// machine-readable payload to `out` and diagnostics to `err`.
//
// Exit codes: 0 = all applicable blocks hold (or work completed),
// 1 = a bound was violated / an oracle assertion or replay failed,
// 2 = invalid input, 3 = every block inapplicable or inconclusive.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bcq::cli
