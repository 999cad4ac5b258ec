#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sleuth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitFailure = 2;

// `args` excludes the program name. Returns 0 when the verb succeeded with
// no Error findings, 1 when it completed with Error findings, 2 on usage,
// IO or mode failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sleuth::cli
