#pragma once

// Command-line front end: datagen / train / infer / eval / sweep.
//
// Every command reads one JSON config file (comments allowed), rejects unknown
// keys, materializes all defaults — seeds included — and echoes the resolved
// configuration to stderr and to <out>/config.json, so a run can be reproduced
// from its artifacts alone. stdout carries the command's results (paths,
// summaries, metrics JSON).
//
// Exit codes are a stable contract:
//   0  success
//   1  unexpected internal failure
//   2  configuration problem (bad config file, bad flags, refusal to overwrite)
//   3  dataset generation failure
//   4  training divergence (the message names the epoch)
//   5  model/dataset incompatibility (mismatched dimensions, bad sample index)

namespace lfld {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDatagen = 3;
inline constexpr int kExitDivergence = 4;
inline constexpr int kExitIncompatible = 5;

/// Full CLI entry point (parses argv, runs one subcommand, maps errors to the
/// exit-code contract above). `main` is a thin wrapper over this.
int cli_main(int argc, const char* const* argv);

}  // namespace lfld
