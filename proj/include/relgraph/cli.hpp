#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relgraph::cli {

// Exit codes of the relgraph command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRuntime = 3;

// Runs `relgraph <subcommand> ...`. `args` excludes the program name.
// Reports go to `out` (or to --output files), progress and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relgraph::cli
