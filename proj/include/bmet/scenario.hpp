#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmet/consensus.hpp"
#include "bmet/equilibrium.hpp"
#include "bmet/market.hpp"
#include "bmet/netsim.hpp"

namespace bmet {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CityScenario {
  CityMarket market;
  double balance_ea = 1e4;  ///< initial balance of the electricity aggregator
  double balance_ha = 1e4;
};

struct ConsensusScenario {
  std::size_t nodes = 0;  ///< standalone runs: ids are N0..N{nodes-1}
  ConsensusConfig config;
  FaultProfile profile;  ///< behaviors filled in by resolve_profile
  std::map<std::string, Behavior> faults;
};

/// Funding event applied at the start of a day.
struct Deposit {
  std::size_t day = 0;
  std::string account;
  double amount = 0.0;
};

struct RunScenario {
  std::uint64_t seed = 1;
  std::vector<NeInit> inits{NeInit::LowCorner};
  NeConfig ne;
  std::size_t rounds = 100;         ///< consensus subcommand
  std::size_t days = 1;             ///< full subcommand
  std::size_t rounds_per_day = 10;  ///< consensus rounds available per day
  std::vector<Deposit> deposits;
};

struct Scenario {
  std::vector<CityScenario> cities;
  bool has_consensus = false;
  ConsensusScenario consensus;
  RunScenario run;

  /// Market invariants for every city plus consensus and run settings.
  void validate() const;
};

/// Section/key text format. Sections: [market] (one per city, repeatable),
/// [communities] (one per community, attached to the last market),
/// [consensus], [faults] (node id = behavior), [run]. '#' and ';' start
/// comments. Errors name the source and line.
Scenario parse_scenario(std::istream& in, const std::string& source = "<input>");
Scenario load_scenario(const std::string& path);

std::string to_string(NeInit init);
NeInit parse_init(const std::string& s);

/// Node ids and behaviors for a given id list, applying [faults].
FaultProfile resolve_profile(const ConsensusScenario& cs, const std::vector<std::string>& ids);

/// ids N0..N{n-1} for standalone consensus runs.
std::vector<std::string> standalone_ids(std::size_t n);

/// Consensus nodes of a full run: one electricity and one heat aggregator
/// per city, "EA_<city>" and "HA_<city>".
std::vector<std::string> aggregator_ids(const Scenario& s);

}  // namespace bmet
