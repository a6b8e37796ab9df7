#ifndef ECGID_TOOLS_CLI_HPP
#define ECGID_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ecgid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIntegrity = 3;

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit status. Summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace ecgid::cli

#endif  // ECGID_TOOLS_CLI_HPP
