#pragma once

namespace pfml::cli {

/// Exit codes of the pfml tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;

/// Entry point: parses argv, dispatches to a subcommand and maps errors to
/// exit codes.
int run_cli(int argc, char** argv);

}  // namespace pfml::cli
