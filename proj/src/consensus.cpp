#include "bmet/consensus.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bmet {

void CreditParams::validate() const {
  if (!(delta2 > 0.0 && delta1 > delta2 && delta1 <= 1.0))
    throw std::invalid_argument("credit deltas must satisfy 1 >= delta1 > delta2 > 0");
}

CreditTable::CreditTable(std::size_t n, double initial) : credit_(n, initial) {
  if (!(initial >= 0.0 && initial <= 1.0)) throw std::invalid_argument("credit outside [0, 1]");
}

void CreditTable::set(std::size_t i, double c) {
  credit_.at(i) = std::clamp(c, 0.0, 1.0);
}

double CreditTable::total() const {
  double s = 0.0;
  for (double c : credit_) s += c;
  return s;
}

std::size_t elect_leader(const CreditTable& credits, std::mt19937_64& rng) {
  const double total = credits.total();
  if (!(total > 0.0)) throw ConsensusError(ConsensusErrc::AllCreditsZero, "elect_leader: all credits are zero");
  const double u = unit_draw(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < credits.size(); ++i) {
    if (credits[i] <= 0.0) continue;
    acc += credits[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;  // u landed in the rounding gap at the top
}

double quorum_weight(std::size_t n) {
  if (n < 4)
    throw ConsensusError(ConsensusErrc::TooFewNodes,
                         "quorum_weight: need at least 4 nodes, got " + std::to_string(n));
  const std::size_t f = (n - 1) / 3;
  return static_cast<double>(2 * f + 1) / static_cast<double>(n);
}

bool check_quorum(const std::set<std::size_t>& received, const CreditTable& credits) {
  const std::size_t n = credits.size();
  const double threshold = quorum_weight(n);
  const double total = credits.total();
  if (!(total > 0.0)) return false;
  double got = 0.0;
  for (std::size_t i : received)
    if (i < n) got += credits[i];
  // Compared as got/total >= (2f+1)/n, cross-multiplied, with a relative
  // slack for summation rounding so the exact-threshold case passes.
  const double lhs = got * static_cast<double>(n);
  const double rhs = threshold * static_cast<double>(n) * total;
  return lhs >= rhs * (1.0 - 1e-12);
}

std::optional<std::size_t> min_quorum_cardinality(const std::vector<std::size_t>& eligible,
                                                  const CreditTable& credits) {
  std::vector<std::size_t> order = eligible;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return credits[a] > credits[b]; });
  std::set<std::size_t> chosen;
  for (std::size_t i : order) {
    chosen.insert(i);
    if (check_quorum(chosen, credits)) return chosen.size();
  }
  return std::nullopt;
}

std::string_view to_string(Vote v) {
  switch (v) {
    case Vote::Agree: return "agree";
    case Vote::Disagree: return "disagree";
    case Vote::Abstain: return "abstain";
    case Vote::Equivocal: return "equivocal";
  }
  return "?";
}

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::LeaderSilent: return "LeaderSilent";
    case AbortReason::LeaderInvalidBlock: return "LeaderInvalidBlock";
    case AbortReason::PrepareQuorumFailed: return "PrepareQuorumFailed";
    case AbortReason::CommitQuorumFailed: return "CommitQuorumFailed";
  }
  return "?";
}

CreditTable update_credits(const CreditTable& credits, const RoundOutcome& outcome,
                           const CreditParams& params) {
  CreditTable next = credits;
  const bool committed = outcome.is_committed();
  const bool silent = outcome.abort_reason == AbortReason::LeaderSilent;
  for (std::size_t i = 0; i < credits.size(); ++i) {
    if (i == outcome.leader) {
      next.set(i, credits[i] + (committed ? params.delta1 : -params.delta1));
      continue;
    }
    if (silent) continue;
    const Vote v = i < outcome.votes.size() ? outcome.votes[i] : Vote::Abstain;
    bool matched = false;
    if (v != Vote::Equivocal) matched = committed ? v == Vote::Agree : v != Vote::Agree;
    next.set(i, credits[i] + (matched ? params.delta2 : -params.delta2));
  }
  next.advance();
  return next;
}

Simulation::Simulation(std::vector<std::string> ids, FaultProfile profile, ConsensusConfig config,
                       std::uint64_t seed)
    : profile_(std::move(profile)),
      config_(config),
      seed_(seed),
      keys_(seed),
      credits_(ids.size()),
      election_rng_(seed),
      network_(ids.size(), profile_.drop_probability, profile_.delay,
               seed ^ 0x9E3779B97F4A7C15ULL) {
  quorum_weight(ids.size());
  if (profile_.behaviors.size() != ids.size())
    throw std::invalid_argument("fault profile covers " + std::to_string(profile_.behaviors.size()) +
                                " nodes, expected " + std::to_string(ids.size()));
  profile_.validate();
  config_.credit.validate();
  if (config_.max_block_txs == 0) throw std::invalid_argument("max_block_txs must be positive");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second) throw std::invalid_argument("duplicate node id " + ids[i]);
    nodes_.emplace_back(i, ids[i], profile_.behaviors[i], keys_.issue(ids[i]));
  }
}

std::int64_t Simulation::round_timeout() const {
  return config_.round_timeout > 0 ? config_.round_timeout : 3 * profile_.delay.max + 1;
}

std::size_t Simulation::submit(const Contract& c) {
  if (!contract_signatures_valid(c, keys_)) return 0;
  std::size_t accepted = 0;
  for (ConsensusNode& n : nodes_)
    if (!n.chain_.contains_tx(c.id) && n.pool_.add(c)) ++accepted;
  return accepted;
}

bool Simulation::honest_chains_identical() const {
  std::optional<Hash256> tip;
  for (const ConsensusNode& n : nodes_) {
    if (!n.honest()) continue;
    if (!tip) tip = n.chain().tip_hash();
    else if (*tip != n.chain().tip_hash()) return false;
  }
  return true;
}

void Simulation::sign_block(const ConsensusNode& leader, Block& b) const {
  b.leader_sig = sign(leader.key_.secret_key, b.signing_message());
}

Block Simulation::propose(ConsensusNode& leader, std::uint64_t round) const {
  Block b;
  b.height = leader.chain_.height() + 1;
  b.prev_hash = leader.chain_.tip_hash();
  b.leader = leader.id();
  b.round = round;
  b.txs = leader.pool_.select(config_.max_block_txs);
  b.merkle_root = merkle_root(b.txs);
  sign_block(leader, b);
  return b;
}

Message Simulation::make(const ConsensusNode& from, MsgKind kind, const Hash256& hash,
                         const Hash256& leader_sig) const {
  Message m;
  m.kind = kind;
  m.round = round_;
  m.sender = from.index();
  m.block_hash = hash;
  m.leader_sig = leader_sig;
  m.signature = sign(from.key_.secret_key, m.signing_message());
  return m;
}

namespace {

std::vector<std::size_t> peers_of(std::size_t self, std::size_t n) {
  std::vector<std::size_t> p;
  for (std::size_t i = 0; i < n; ++i)
    if (i != self) p.push_back(i);
  return p;
}

}  // namespace

void Simulation::send_leader_messages(ConsensusNode& leader, std::uint64_t round) {
  Block b = propose(leader, round);
  auto pre_prepare = [&](const Block& blk) {
    Message m = make(leader, MsgKind::PrePrepare, blk.hash(), blk.leader_sig);
    m.block = std::make_shared<const Block>(blk);
    return m;
  };

  if (leader.behavior() == Behavior::InvalidBlockLeader) {
    if (!b.txs.empty()) {
      b.txs.front().amount = b.txs.front().amount * 2.0 + 1.0;
      b.merkle_root = merkle_root(b.txs);
    } else {
      b.merkle_root[0] ^= 0x01;
    }
    sign_block(leader, b);
  }

  if (leader.behavior() == Behavior::Equivocator) {
    // Conflicting proposals to the two halves of the peers: the real block and
    // a variant without transactions (or with a forged seal if already empty).
    Block alt = b;
    if (!alt.txs.empty()) {
      alt.txs.clear();
      alt.merkle_root = merkle_root(alt.txs);
      sign_block(leader, alt);
    } else {
      alt.leader_sig[0] ^= 0x01;
    }
    const auto peers = peers_of(leader.index(), nodes_.size());
    for (std::size_t k = 0; k < peers.size(); ++k) {
      const Block& blk = k < peers.size() / 2 ? b : alt;
      network_.send(peers[k], pre_prepare(blk), 0);
      network_.send(peers[k], make(leader, MsgKind::Prepare, blk.hash(), blk.leader_sig), 0);
    }
    leader.rs_.block = b;
    leader.rs_.sent_prepare = true;
    leader.rs_.prepares[b.hash()].insert(leader.index());
    return;
  }

  network_.broadcast(pre_prepare(b), 0);
  leader.rs_.block = b;
  vote(leader, MsgKind::Prepare, b.hash(), 0);
}

void Simulation::vote(ConsensusNode& node, MsgKind kind, const Hash256& hash, std::int64_t now) {
  const Message m = make(node, kind, hash, node.rs_.block->leader_sig);
  auto& tally = kind == MsgKind::Prepare ? node.rs_.prepares : node.rs_.commits;
  tally[hash].insert(node.index());
  (kind == MsgKind::Prepare ? node.rs_.sent_prepare : node.rs_.sent_commit) = true;

  if (node.behavior() == Behavior::Equivocator) {
    Message forged = m;
    forged.signature[0] ^= 0x01;
    const auto peers = peers_of(node.index(), nodes_.size());
    for (std::size_t k = 0; k < peers.size(); ++k)
      network_.send(peers[k], k < peers.size() / 2 ? m : forged, now);
    return;
  }
  network_.broadcast(m, now);
}

void Simulation::on_proposal(ConsensusNode& node, const Message& msg, std::int64_t now) {
  auto& rs = node.rs_;
  const Block& b = *msg.block;
  if (b.hash() != msg.block_hash) return;
  if (rs.block || rs.rejected) {
    if (rs.block && b.hash() != rs.block->hash() &&
        keys_.verify(nodes_[leader_].id(), b.signing_message(), b.leader_sig))
      rs.equivocation = true;
    return;
  }
  if (auto why = validate_block(b, nodes_[leader_].id(), node.pool_, node.chain_, keys_)) {
    rs.rejected = why;
    return;
  }
  rs.block = b;
  for (const auto& [h, senders] : rs.prepares)
    if (h != msg.block_hash && !senders.empty()) rs.equivocation = true;
  if (rs.equivocation) return;
  vote(node, MsgKind::Prepare, msg.block_hash, now);
  advance(node, now);
}

void Simulation::advance(ConsensusNode& node, std::int64_t now) {
  auto& rs = node.rs_;
  if (!rs.block || rs.rejected || rs.equivocation) return;
  const Hash256 h = rs.block->hash();
  if (rs.sent_prepare && !rs.sent_commit && check_quorum(rs.prepares[h], credits_))
    vote(node, MsgKind::Commit, h, now);
  if (rs.sent_commit && !rs.committed && check_quorum(rs.commits[h], credits_)) {
    rs.committed = true;
    if (node.honest()) {
      node.chain_.append(*rs.block);
      node.pool_.remove(rs.block->txs);
    }
  }
}

void Simulation::on_deliver(ConsensusNode& node, const Message& msg, std::int64_t now) {
  if (msg.round != round_ || msg.sender >= nodes_.size()) return;
  if (node.behavior() == Behavior::Dissenter) return;
  if (!keys_.verify(nodes_[msg.sender].id(), msg.signing_message(), msg.signature)) return;

  if (msg.kind == MsgKind::PrePrepare) {
    if (msg.sender == leader_ && msg.block) on_proposal(node, msg, now);
    return;
  }
  // Votes must carry the leader's seal on the hash they endorse.
  if (!keys_.verify(nodes_[leader_].id(), to_hex(msg.block_hash), msg.leader_sig)) return;
  auto& rs = node.rs_;
  if (msg.kind == MsgKind::Prepare) {
    rs.prepares[msg.block_hash].insert(msg.sender);
    if (rs.block && msg.block_hash != rs.block->hash()) rs.equivocation = true;
  } else {
    rs.commits[msg.block_hash].insert(msg.sender);
  }
  advance(node, now);
}

RoundOutcome Simulation::run_round() {
  ++round_;
  const CreditTable start = credits_;
  leader_ = elect_leader(credits_, election_rng_);
  for (ConsensusNode& n : nodes_) n.rs_ = {};
  network_.clear();
  const std::uint64_t sent_before = network_.sent();

  ConsensusNode& leader = nodes_[leader_];
  const bool leader_sent =
      leader.behavior() != Behavior::SilentLeader && leader.behavior() != Behavior::Dissenter;
  if (leader_sent) send_leader_messages(leader, round_);

  const std::int64_t timeout = round_timeout();
  while (auto d = network_.pop(timeout)) on_deliver(nodes_[d->to], d->msg, d->time);
  network_.clear();

  RoundOutcome out;
  out.round = round_;
  out.leader = leader_;
  out.leader_id = leader.id();
  out.messages_sent = network_.sent() - sent_before;

  bool honest_rejected = false;
  bool honest_prepared_quorum = false;
  for (const ConsensusNode& n : nodes_) {
    if (!n.honest()) continue;
    const auto& rs = n.rs_;
    if (rs.rejected || rs.equivocation) honest_rejected = true;
    if (rs.sent_commit) honest_prepared_quorum = true;
    if (!rs.committed) continue;
    if (!out.committed) out.committed = *rs.block;
    else if (out.committed->hash() != rs.block->hash()) out.safety_violation = true;
  }

  if (!leader_sent) out.abort_reason = AbortReason::LeaderSilent;
  else if (out.committed) out.abort_reason.reset();
  else if (honest_rejected) out.abort_reason = AbortReason::LeaderInvalidBlock;
  else if (!honest_prepared_quorum) out.abort_reason = AbortReason::PrepareQuorumFailed;
  else out.abort_reason = AbortReason::CommitQuorumFailed;

  if (out.committed) {
    const Hash256 h = out.committed->hash();
    for (ConsensusNode& n : nodes_) {
      if (n.chain_.tip_hash() == h) continue;
      if (n.chain_.height() + 1 == out.committed->height && n.chain_.tip_hash() == out.committed->prev_hash) {
        n.chain_.append(*out.committed);
        n.pool_.remove(out.committed->txs);
      }
    }
  }

  out.votes.assign(nodes_.size(), Vote::Abstain);
  for (const ConsensusNode& n : nodes_) {
    Vote& v = out.votes[n.index()];
    const auto& rs = n.rs_;
    if (n.index() == leader_) v = leader_sent ? Vote::Agree : Vote::Abstain;
    else if (n.behavior() == Behavior::Dissenter) v = Vote::Disagree;
    else if (n.behavior() == Behavior::Equivocator) v = Vote::Equivocal;
    else if (rs.rejected || rs.equivocation) v = Vote::Disagree;
    else if (rs.sent_prepare) v = Vote::Agree;
  }

  std::vector<std::size_t> honest;
  for (const ConsensusNode& n : nodes_)
    if (n.honest()) honest.push_back(n.index());
  out.prepare_msgs_needed = min_quorum_cardinality(honest, start);

  credits_ = update_credits(start, out, config_.credit);
  out.credit_deltas.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out.credit_deltas[i] = credits_[i] - start[i];
    (nodes_[i].honest() ? out.credit_honest : out.credit_byzantine) += credits_[i];
  }

  std::uint64_t height = 0;
  for (const ConsensusNode& n : nodes_)
    if (n.honest() || honest.empty()) height = std::max(height, n.chain().height());
  out.committed_height = height;
  return out;
}

RunResult run_rounds(Simulation& sim, std::size_t n_rounds) {
  RunResult r;
  double needed_sum = 0.0;
  std::size_t needed_count = 0;
  for (std::size_t i = 0; i < n_rounds; ++i) {
    RoundOutcome o = sim.run_round();
    if (o.is_committed()) ++r.metrics.committed_blocks;
    if (o.safety_violation) ++r.metrics.safety_violations;
    if (o.prepare_msgs_needed) {
      needed_sum += static_cast<double>(*o.prepare_msgs_needed);
      ++needed_count;
    }
    r.metrics.credit_trajectory.push_back(sim.credits().values());
    r.outcomes.push_back(std::move(o));
  }
  r.metrics.rounds = n_rounds;
  r.metrics.mean_prepare_msgs_needed = needed_count ? needed_sum / static_cast<double>(needed_count) : 0.0;
  return r;
}

std::string round_log_csv(const std::vector<RoundOutcome>& outcomes, std::uint64_t seed) {
  std::ostringstream os;
  os << "# seed=" << seed << '\n';
  os << "round,leader,decision,abort_reason,committed_height,credit_honest,credit_byz,prepare_msgs_needed\n";
  char buf[64];
  for (const RoundOutcome& o : outcomes) {
    os << o.round << ',' << o.leader_id << ',' << (o.is_committed() ? "Committed" : "Aborted") << ','
       << (o.abort_reason ? to_string(*o.abort_reason) : "") << ',' << o.committed_height << ',';
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", o.credit_honest, o.credit_byzantine);
    os << buf;
    if (o.prepare_msgs_needed) os << *o.prepare_msgs_needed;
    else os << "NA";
    os << '\n';
  }
  return os.str();
}

}  // namespace bmet
