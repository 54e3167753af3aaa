#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace civitas {

// Exit codes: 0 all compliant / holds; 2 at least one violation or a
// counterexample; 3 indeterminate without violations or budget exhausted;
// 1 usage, parse or internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitIndeterminate = 3;

/// Runs the civitas command line (subcommands: check, find, rules, fmt)
/// against explicit streams. `color` styles text reports only.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            bool color = false);

}  // namespace civitas
