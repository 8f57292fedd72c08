#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bmet/chain.hpp"
#include "bmet/crypto.hpp"
#include "bmet/netsim.hpp"

namespace bmet {

enum class ConsensusErrc { AllCreditsZero, TooFewNodes };

class ConsensusError : public std::runtime_error {
 public:
  ConsensusError(ConsensusErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ConsensusErrc code() const { return code_; }

 private:
  ConsensusErrc code_;
};

struct CreditParams {
  double delta1 = 0.05;  ///< leader reward/penalty
  double delta2 = 0.02;  ///< voter reward/penalty

  /// Requires delta1 > delta2 > 0.
  void validate() const;
};

/// Per-node credit in [0, 1], indexed like the node list.
class CreditTable {
 public:
  CreditTable() = default;
  explicit CreditTable(std::size_t n, double initial = 0.5);

  std::size_t size() const { return credit_.size(); }
  double operator[](std::size_t i) const { return credit_[i]; }
  void set(std::size_t i, double c);
  const std::vector<double>& values() const { return credit_; }
  double total() const;
  std::uint64_t round() const { return round_; }
  void advance() { ++round_; }

 private:
  std::vector<double> credit_;
  std::uint64_t round_ = 0;
};

/// Samples node k with probability credit_k / total from one draw of `rng`.
std::size_t elect_leader(const CreditTable& credits, std::mt19937_64& rng);

/// (2*floor((n-1)/3) + 1) / n. Throws TooFewNodes for n < 4.
double quorum_weight(std::size_t n);

/// True iff the credit mass of `received` reaches quorum_weight(n) of the
/// total. Duplicate ids count once.
bool check_quorum(const std::set<std::size_t>& received, const CreditTable& credits);

/// Smallest number of nodes from `eligible` whose credit mass meets the
/// quorum, or nullopt if even all of them fall short.
std::optional<std::size_t> min_quorum_cardinality(const std::vector<std::size_t>& eligible,
                                                  const CreditTable& credits);

enum class Vote { Agree, Disagree, Abstain, Equivocal };
enum class AbortReason { LeaderSilent, LeaderInvalidBlock, PrepareQuorumFailed, CommitQuorumFailed };

std::string_view to_string(Vote v);
std::string_view to_string(AbortReason r);

struct RoundOutcome {
  std::uint64_t round = 0;
  std::size_t leader = 0;
  std::string leader_id;
  std::optional<Block> committed;     ///< set iff the round decided a block
  std::optional<AbortReason> abort_reason;
  std::uint64_t committed_height = 0;  ///< chain height after the round
  std::vector<Vote> votes;             ///< per node; the leader's entry is unused
  std::vector<double> credit_deltas;
  std::optional<std::size_t> prepare_msgs_needed;  ///< min honest quorum size at round start
  double credit_honest = 0.0;  ///< after the update
  double credit_byzantine = 0.0;
  std::uint64_t messages_sent = 0;
  bool safety_violation = false;

  bool is_committed() const { return committed.has_value(); }
};

/// Leader: +delta1 on commit, -delta1 otherwise. Other nodes: +delta2 when
/// their vote matches the decision, -delta2 otherwise, where abstaining
/// counts as disagreeing and an equivocal vote never matches. A round whose
/// leader sent nothing leaves the other nodes unchanged. Clamped to [0, 1].
CreditTable update_credits(const CreditTable& credits, const RoundOutcome& outcome,
                           const CreditParams& params);

struct ConsensusConfig {
  CreditParams credit;
  std::size_t max_block_txs = 1000;
  /// Ticks a round may run; 0 means 3 * delay.max + 1.
  std::int64_t round_timeout = 0;
};

/// One aggregator's replica: its chain, pool and per-round protocol state.
class ConsensusNode {
 public:
  ConsensusNode(std::size_t index, std::string id, Behavior behavior, KeyPair key)
      : index_(index), id_(std::move(id)), behavior_(behavior), key_(std::move(key)) {}

  std::size_t index() const { return index_; }
  const std::string& id() const { return id_; }
  Behavior behavior() const { return behavior_; }
  bool honest() const { return behavior_ == Behavior::Honest; }
  const Chain& chain() const { return chain_; }
  const TxPool& pool() const { return pool_; }

 private:
  friend class Simulation;

  struct RoundState {
    std::optional<Block> block;  ///< accepted proposal
    std::optional<BlockReject> rejected;
    bool equivocation = false;
    bool sent_prepare = false;
    bool sent_commit = false;
    bool committed = false;
    std::map<Hash256, std::set<std::size_t>> prepares;
    std::map<Hash256, std::set<std::size_t>> commits;
  };

  std::size_t index_;
  std::string id_;
  Behavior behavior_;
  KeyPair key_;
  Chain chain_;
  TxPool pool_;
  RoundState rs_;
};

struct RunMetrics {
  std::size_t rounds = 0;
  std::size_t committed_blocks = 0;
  std::size_t safety_violations = 0;
  double mean_prepare_msgs_needed = 0.0;  ///< over rounds where a quorum exists
  std::vector<std::vector<double>> credit_trajectory;  ///< credits after each round
};

struct RunResult {
  std::vector<RoundOutcome> outcomes;
  RunMetrics metrics;
};

/// A set of consensus nodes, their credit table and the network between
/// them. Fully determined by (ids, profile, config, seed).
class Simulation {
 public:
  Simulation(std::vector<std::string> ids, FaultProfile profile, ConsensusConfig config,
             std::uint64_t seed);

  /// Registry holding every node's keys; contract parties may be issued here too.
  KeyRegistry& keys() { return keys_; }
  const KeyRegistry& keys() const { return keys_; }

  /// Delivers a client contract to every node; each pools it only if its
  /// signatures verify. Returns the number of nodes that accepted it.
  std::size_t submit(const Contract& c);

  RoundOutcome run_round();

  const CreditTable& credits() const { return credits_; }
  const std::vector<ConsensusNode>& nodes() const { return nodes_; }
  const FaultProfile& profile() const { return profile_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t round_timeout() const;

  /// True iff every honest chain has the same tip hash.
  bool honest_chains_identical() const;

 private:
  Block propose(ConsensusNode& leader, std::uint64_t round) const;
  void sign_block(const ConsensusNode& leader, Block& b) const;
  Message make(const ConsensusNode& from, MsgKind kind, const Hash256& hash,
               const Hash256& leader_sig) const;
  void send_leader_messages(ConsensusNode& leader, std::uint64_t round);
  void on_deliver(ConsensusNode& node, const Message& msg, std::int64_t now);
  void on_proposal(ConsensusNode& node, const Message& msg, std::int64_t now);
  void advance(ConsensusNode& node, std::int64_t now);
  void vote(ConsensusNode& node, MsgKind kind, const Hash256& hash, std::int64_t now);

  std::vector<ConsensusNode> nodes_;
  FaultProfile profile_;
  ConsensusConfig config_;
  std::uint64_t seed_;
  KeyRegistry keys_;
  CreditTable credits_;
  std::mt19937_64 election_rng_;
  Network network_;
  std::size_t leader_ = 0;
  std::uint64_t round_ = 0;
};

RunResult run_rounds(Simulation& sim, std::size_t n_rounds);

/// Round log with columns round, leader, decision, abort_reason,
/// committed_height, credit_honest, credit_byz, prepare_msgs_needed,
/// preceded by a "# seed=" comment line.
std::string round_log_csv(const std::vector<RoundOutcome>& outcomes, std::uint64_t seed);

}  // namespace bmet
