#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "bmet/consensus.hpp"
#include "bmet/ledger.hpp"
#include "bmet/scenario.hpp"

using namespace bmet;

namespace {

CreditTable table(const std::vector<double>& c) {
  CreditTable t(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) t.set(i, c[i]);
  return t;
}

RoundOutcome outcome(std::size_t n, std::size_t leader, bool committed, std::vector<Vote> votes,
                     std::optional<AbortReason> reason = std::nullopt) {
  RoundOutcome o;
  o.leader = leader;
  if (committed) o.committed = Block{};
  o.abort_reason = reason;
  o.votes = std::move(votes);
  o.votes.resize(n, Vote::Agree);
  return o;
}

FaultProfile with(std::size_t n, std::map<std::size_t, Behavior> faults) {
  FaultProfile p = FaultProfile::all_honest(n);
  for (auto [i, b] : faults) p.behaviors[i] = b;
  return p;
}

}  // namespace

TEST(Quorum, Weights) {
  EXPECT_DOUBLE_EQ(quorum_weight(4), 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(quorum_weight(7), 5.0 / 7.0);
  EXPECT_DOUBLE_EQ(quorum_weight(20), 13.0 / 20.0);
  EXPECT_DOUBLE_EQ(quorum_weight(21), 13.0 / 21.0);
  EXPECT_DOUBLE_EQ(quorum_weight(22), 15.0 / 22.0);
  try {
    quorum_weight(3);
    FAIL();
  } catch (const ConsensusError& e) {
    EXPECT_EQ(e.code(), ConsensusErrc::TooFewNodes);
  }
}

TEST(Quorum, CheckAtBoundary) {
  const CreditTable eq(4);
  EXPECT_TRUE(check_quorum({0, 1, 2}, eq));
  EXPECT_FALSE(check_quorum({0, 1}, eq));
  // Thirds and sevenths round badly in binary; the boundary still passes.
  const CreditTable sev(7, 0.1);
  EXPECT_TRUE(check_quorum({0, 1, 2, 3, 4}, sev));
  EXPECT_FALSE(check_quorum({0, 1, 2, 3}, sev));
  const CreditTable skew = table({0.9, 0.1, 0.1, 0.1});
  EXPECT_TRUE(check_quorum({0}, skew));
  EXPECT_FALSE(check_quorum({1, 2, 3}, skew));
}

TEST(Quorum, MinCardinality) {
  const CreditTable t = table({1.0, 1.0, 1.0, 0.0, 0.0, 0.5, 0.5});
  // total 4, weight 5/7 -> need >= 2.857
  EXPECT_EQ(min_quorum_cardinality({0, 1, 2, 3, 4, 5, 6}, t), 3u);
  EXPECT_EQ(min_quorum_cardinality({3, 4, 5, 6}, t), std::nullopt);
  EXPECT_EQ(min_quorum_cardinality({1, 2, 5, 6}, t), 4u);
}

TEST(Election, AllZeroThrows) {
  std::mt19937_64 rng(1);
  try {
    elect_leader(CreditTable(5, 0.0), rng);
    FAIL();
  } catch (const ConsensusError& e) {
    EXPECT_EQ(e.code(), ConsensusErrc::AllCreditsZero);
  }
}

TEST(Election, ZeroCreditNeverElected) {
  std::mt19937_64 rng(3);
  const CreditTable t = table({0.0, 0.4, 0.0, 0.6, 0.0});
  for (int i = 0; i < 20000; ++i) {
    const std::size_t k = elect_leader(t, rng);
    EXPECT_TRUE(k == 1 || k == 3) << k;
  }
}

TEST(Election, FrequenciesProportionalToCredit) {
  std::mt19937_64 rng(11);
  const std::vector<double> c{0.1, 0.2, 0.3, 0.4, 1.0};
  const CreditTable t = table(c);
  const int draws = 200000;
  std::vector<int> hits(c.size());
  for (int i = 0; i < draws; ++i) ++hits[elect_leader(t, rng)];
  double chi2 = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double expected = draws * c[k] / 2.0;
    chi2 += (hits[k] - expected) * (hits[k] - expected) / expected;
  }
  EXPECT_LT(chi2, 18.47);  // 4 dof, p = 0.001
}

TEST(Election, OneDrawPerElection) {
  std::mt19937_64 a(5), b(5);
  elect_leader(CreditTable(6), a);
  b();
  EXPECT_EQ(a(), b());
}

TEST(Credits, CommitRewardsAgreement) {
  const CreditTable t(5);
  const CreditTable u = update_credits(
      t, outcome(5, 0, true, {Vote::Agree, Vote::Agree, Vote::Disagree, Vote::Abstain, Vote::Equivocal}),
      {});
  EXPECT_DOUBLE_EQ(u[0], 0.55);
  EXPECT_DOUBLE_EQ(u[1], 0.52);
  EXPECT_DOUBLE_EQ(u[2], 0.48);
  EXPECT_DOUBLE_EQ(u[3], 0.48);
  EXPECT_DOUBLE_EQ(u[4], 0.48);
}

TEST(Credits, AbortRewardsDisagreement) {
  const CreditTable t(4);
  const CreditTable u = update_credits(
      t, outcome(4, 1, false, {Vote::Agree, Vote::Agree, Vote::Disagree, Vote::Abstain},
                 AbortReason::LeaderInvalidBlock),
      {});
  EXPECT_DOUBLE_EQ(u[0], 0.48);
  EXPECT_DOUBLE_EQ(u[1], 0.45);
  EXPECT_DOUBLE_EQ(u[2], 0.52);
  EXPECT_DOUBLE_EQ(u[3], 0.52);
}

TEST(Credits, SilentLeaderOnlyPenalizesLeader) {
  const CreditTable t(4);
  const CreditTable u = update_credits(
      t, outcome(4, 2, false, {Vote::Abstain, Vote::Abstain, Vote::Abstain, Vote::Abstain},
                 AbortReason::LeaderSilent),
      {});
  EXPECT_EQ(u.values(), (std::vector<double>{0.5, 0.5, 0.45, 0.5}));
}

TEST(Credits, Clamped) {
  const CreditTable t = table({1.0, 0.01, 0.99, 0.0});
  const CreditTable u =
      update_credits(t, outcome(4, 0, true, {Vote::Agree, Vote::Disagree, Vote::Agree, Vote::Disagree}), {});
  EXPECT_EQ(u.values(), (std::vector<double>{1.0, 0.0, 1.0, 0.0}));
  EXPECT_THROW((CreditParams{0.02, 0.05}.validate()), std::invalid_argument);
  EXPECT_THROW((CreditParams{0.05, 0.0}.validate()), std::invalid_argument);
}

TEST(Simulation, TooFewNodes) {
  try {
    Simulation(standalone_ids(3), FaultProfile::all_honest(3), {}, 1);
    FAIL();
  } catch (const ConsensusError& e) {
    EXPECT_EQ(e.code(), ConsensusErrc::TooFewNodes);
  }
}

TEST(Simulation, SilentLeaderRoundsAbort) {
  Simulation sim(standalone_ids(7), with(7, {{2, Behavior::SilentLeader}}), {}, 3);
  const RunResult r = run_rounds(sim, 300);
  std::size_t silent = 0;
  for (const RoundOutcome& o : r.outcomes) {
    if (o.leader == 2) {
      ++silent;
      EXPECT_EQ(o.abort_reason, AbortReason::LeaderSilent);
      EXPECT_FALSE(o.is_committed());
    } else {
      EXPECT_TRUE(o.is_committed());
    }
  }
  EXPECT_GT(silent, 0u);
}

TEST(Simulation, InvalidBlockIsRejectedByHonestNodes) {
  Simulation sim(standalone_ids(7), with(7, {{4, Behavior::InvalidBlockLeader}}), {}, 6);
  KeyRegistry& keys = sim.keys();
  Ledger ledger;
  const KeyPair a = ledger.register_account(Role::Aggregator, "A", "S", keys, 1e9).second;
  const KeyPair d = ledger.register_account(Role::Des, "D", "S", keys).second;
  ledger.set_daily_capacity("D", {1e9, 1e9});
  std::size_t invalid = 0;
  for (int round = 0; round < 200; ++round) {
    EXPECT_EQ(sim.submit(ledger.create_contract("A", "D", EnergyKind::Heat, 1.0, 1.0, 0, 0, keys, a, d)), 7u);
    const RoundOutcome o = sim.run_round();
    if (o.leader == 4) {
      ++invalid;
      EXPECT_EQ(o.abort_reason, AbortReason::LeaderInvalidBlock);
      EXPECT_EQ(o.votes[0], Vote::Disagree);
    } else {
      EXPECT_TRUE(o.is_committed());
    }
  }
  EXPECT_GT(invalid, 0u);
  EXPECT_TRUE(sim.honest_chains_identical());
  for (const Block& b : sim.nodes()[0].chain().blocks())
    EXPECT_NE(b.leader, sim.nodes()[4].id());
}

TEST(Simulation, SubmitRejectsForgedContract) {
  Simulation sim(standalone_ids(4), FaultProfile::all_honest(4), {}, 1);
  KeyRegistry& keys = sim.keys();
  Ledger ledger;
  const KeyPair a = ledger.register_account(Role::Aggregator, "A", "S", keys, 10).second;
  const KeyPair d = ledger.register_account(Role::Des, "D", "S", keys).second;
  ledger.set_daily_capacity("D", {10, 10});
  Contract c = ledger.create_contract("A", "D", EnergyKind::Electricity, 1.0, 2.0, 0, 0, keys, a, d);
  c.amount = 3.0;
  EXPECT_EQ(sim.submit(c), 0u);
}

TEST(Simulation, EquivocationNeverSplitsHonestChains) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FaultProfile p = with(10, {{1, Behavior::Equivocator}, {5, Behavior::Equivocator}, {8, Behavior::Equivocator}});
    p.delay = {1, 3};
    Simulation sim(standalone_ids(10), p, {}, seed);
    const RunResult r = run_rounds(sim, 300);
    EXPECT_EQ(r.metrics.safety_violations, 0u) << seed;
    EXPECT_TRUE(sim.honest_chains_identical()) << seed;
    for (std::size_t i : {1, 5, 8}) EXPECT_EQ(sim.credits()[i], 0.0);
  }
}

TEST(Simulation, HonestCreditsSaturate) {
  Simulation sim(standalone_ids(12),
                 with(12, {{0, Behavior::Dissenter}, {6, Behavior::SilentLeader}, {9, Behavior::Equivocator}}),
                 {}, 21);
  run_rounds(sim, 500);
  for (const ConsensusNode& n : sim.nodes()) {
    if (n.honest()) EXPECT_EQ(sim.credits()[n.index()], 1.0) << n.id();
  }
  EXPECT_EQ(sim.credits()[0], 0.0);
  EXPECT_EQ(sim.credits()[9], 0.0);
}

TEST(Simulation, RoundLogFormat) {
  Simulation sim(standalone_ids(4), FaultProfile::all_honest(4), {}, 9);
  const std::string log = round_log_csv(run_rounds(sim, 2).outcomes, 9);
  std::istringstream is(log);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# seed=9");
  std::getline(is, line);
  EXPECT_EQ(line,
            "round,leader,decision,abort_reason,committed_height,credit_honest,credit_byz,prepare_msgs_needed");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Simulation, LoneDissenterReachesZeroWithinBound) {
  const std::size_t bound = static_cast<std::size_t>(std::ceil(0.5 / CreditParams{}.delta2));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Simulation sim(standalone_ids(7), with(7, {{3, Behavior::Dissenter}}), {}, seed);
    std::size_t reached = 0;
    for (std::size_t r = 1; r <= bound && !reached; ++r) {
      sim.run_round();
      if (sim.credits()[3] == 0.0) reached = r;
    }
    EXPECT_GT(reached, 0u) << "seed " << seed;
  }
}

TEST(Simulation, HonestCreditNeverDecreasesAgainstDissenters) {
  Simulation sim(standalone_ids(10), with(10, {{2, Behavior::Dissenter}, {7, Behavior::Dissenter}}), {}, 17);
  std::vector<double> prev = sim.credits().values();
  for (int r = 0; r < 500; ++r) {
    sim.run_round();
    for (const ConsensusNode& n : sim.nodes())
      if (n.honest()) EXPECT_GE(sim.credits()[n.index()], prev[n.index()]) << n.id() << " round " << r;
    prev = sim.credits().values();
  }
}
