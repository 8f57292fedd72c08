#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace bmet {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2, kExitSafety = 3 };

struct CliOptions {
  std::string scenario;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  ///< overrides [run] seed
  bool trace = false;                 ///< also write per-node vote records
};

/// Equilibrium per city and init. Writes equilibrium_report.csv,
/// se_<city>.csv and ne_trace_<city>_<init>.csv.
int cmd_equilibrium(const CliOptions& opt, std::ostream& out);

/// Standalone consensus run. Writes round_log.csv (and votes.csv with
/// trace). Returns kExitSafety if honest nodes diverged.
int cmd_consensus(const CliOptions& opt, std::ostream& out);

/// End-to-end days. Writes chain.txt, balances.csv, contracts.csv,
/// market_report.csv, round_log.csv (and votes.csv with trace).
int cmd_full(const CliOptions& opt, std::ostream& out);

/// Runs a subcommand, mapping exceptions to exit codes: malformed or
/// invalid input -> kExitValidation, anything else -> kExitRuntime.
int run_command(const std::string& subcommand, const CliOptions& opt, std::ostream& out,
                std::ostream& err);

}  // namespace bmet
