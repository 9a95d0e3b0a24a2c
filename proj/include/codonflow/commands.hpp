#pragma once

#include <iosfwd>
#include <string>

#include "codonflow/config.hpp"

namespace codonflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitRefused = 2;
inline constexpr int kExitNumeric = 3;

/// Every command writes its files under cfg.output_dir and progress lines to `log`.
/// Errors propagate as exceptions; run_command maps them to exit codes.

/// enumerate.csv and summary.json ({size, Z, front_size}) for one small protein.
int cmd_enumerate(const RunConfig& cfg, std::ostream& log);
/// checkpoint.json, loss_trace.csv, run_config.json and, with a schedule, teacher_trace.csv.
int cmd_train(const RunConfig& cfg, std::ostream& log);
/// samples.csv, metrics.json and histogram.csv from cfg.checkpoint.
int cmd_sample(const RunConfig& cfg, std::ostream& log);
/// scores.csv for the nucleotide sequences in `input`.
int cmd_score(const RunConfig& cfg, const std::string& input, std::ostream& log);
/// verify.json; exit 1 when any check fails.
int cmd_verify(const RunConfig& cfg, std::ostream& log);

/// Dispatches by name and converts exceptions: refused input 2, numeric abort 3.
int run_command(const std::string& name, const RunConfig& cfg, const std::string& input, std::ostream& log);

/// The protein named by cfg.protein, else the first record of cfg.proteins.
Protein resolve_protein(const RunConfig& cfg);

}  // namespace codonflow
