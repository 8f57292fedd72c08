#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmet/consensus.hpp"
#include "bmet/equilibrium.hpp"
#include "bmet/ledger.hpp"
#include "bmet/scenario.hpp"

namespace bmet {

struct CityDay {
  std::string city;
  NeResult ne;
  StackelbergOutcome se;
};

struct DayReport {
  std::size_t day = 0;
  std::vector<CityDay> cities;
  std::size_t contracts_created = 0;
  std::size_t creation_failures = 0;
  std::size_t rounds = 0;
  std::size_t executed = 0;
  std::size_t suspended = 0;
  double deposits = 0.0;
  double total_balance = 0.0;
};

struct FullReport {
  std::vector<DayReport> days;
  std::vector<RoundOutcome> outcomes;
  Ledger ledger;
  Chain chain;  ///< copy of the first honest node's chain
  std::uint64_t seed = 0;
  double initial_total = 0.0;
  double total_deposits = 0.0;
  double balance_drift = 0.0;  ///< |final - initial - deposits|
  std::size_t contracts_total = 0;
  std::size_t contracts_executed = 0;
  std::size_t contracts_suspended = 0;
  std::size_t contracts_uncommitted = 0;
  bool chain_audit = false;
  bool honest_chains_identical = false;
  std::size_t safety_violations = 0;
};

/// Simulates `run.days` trading days. Each day: apply deposits and retry
/// suspended payments; solve each city's equilibrium; sign one contract per
/// community and energy kind for its exported amount at the equilibrium
/// price; run consensus rounds until they are all on chain or the day's
/// round budget is spent; then settle every committed contract that is due.
/// The smart meter confirms every delivery.
FullReport run_full(const Scenario& s);

}  // namespace bmet
