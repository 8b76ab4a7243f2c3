#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpcc::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEpisodeFailure = 1;
inline constexpr int kExitUsage = 2;

/// Subcommands:
///   run   --scenario <name> [--config <path>] [--out <dir>] [--seed <n>] [--override key=value]...
///   cloud [--scenario <name>] [--config <path>] [--seed <n>] [--override key=value]...
///   edge  [--scenario <name>] [--config <path>] [--out <dir>] [--seed <n>] [--override key=value]...
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpcc::harness
