#pragma once

// Command-line front end. Exit codes: 0 success, 1 failed check or invalid
// input, 2 usage error, 3 sampler budget exhausted.

#include <ostream>
#include <string>
#include <vector>

namespace ipdsaw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBudget = 3;

/// args excludes the program name. `--replay <manifest>` reruns a manifest.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipdsaw::cli
