#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twentyq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `twentyq` tool. `args` excludes the program name.
/// Interactive input is read from `in`; answers, CSV and JSON go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace twentyq
