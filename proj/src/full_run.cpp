#include "bmet/full_run.hpp"

#include <cmath>
#include <map>
#include <set>

namespace bmet {

namespace {

std::string des_id(const std::string& city, std::size_t j) {
  return city + "_D" + std::to_string(j + 1);
}

}  // namespace

FullReport run_full(const Scenario& s) {
  s.validate();
  if (!s.has_consensus) throw ScenarioError("full run needs a [consensus] section");
  if (s.cities.empty()) throw ScenarioError("full run needs at least one [market]");

  const std::vector<std::string> ids = aggregator_ids(s);
  Simulation sim(ids, resolve_profile(s.consensus, ids), s.consensus.config, s.run.seed);

  FullReport rep;
  rep.seed = s.run.seed;
  Ledger& ledger = rep.ledger;
  std::map<std::string, KeyPair> keys;
  for (const CityScenario& c : s.cities) {
    const std::string& name = c.market.name;
    ledger.set_price_box(name, c.market.electricity_price_box(), c.market.heat_price_box());
    keys["EA_" + name] = ledger.register_account(Role::Aggregator, "EA_" + name, name, sim.keys(), c.balance_ea).second;
    keys["HA_" + name] = ledger.register_account(Role::Aggregator, "HA_" + name, name, sim.keys(), c.balance_ha).second;
    for (std::size_t j = 0; j < c.market.communities.size(); ++j)
      keys[des_id(name, j)] = ledger.register_account(Role::Des, des_id(name, j), name, sim.keys()).second;
  }
  rep.initial_total = ledger.total_balance();

  // Market parameters are the same every day, so one solve per city serves
  // all days.
  std::vector<CityDay> solved;
  for (const CityScenario& c : s.cities) {
    NeConfig cfg = s.run.ne;
    cfg.init = s.run.inits.front();
    cfg.record_trace = false;
    CityDay cd;
    cd.city = c.market.name;
    cd.ne = find_ne(c.market, cfg);
    cd.se = stackelberg_outcome(c.market, cd.ne.prices);
    solved.push_back(std::move(cd));
  }

  const auto meter = [](const Contract&) { return true; };
  const auto R = static_cast<std::int64_t>(s.run.rounds_per_day);
  std::vector<std::string> commit_order;
  std::set<std::string> pending;

  for (std::size_t day = 1; day <= s.run.days; ++day) {
    DayReport dr;
    dr.day = day;
    dr.cities = solved;
    const std::int64_t day_start = static_cast<std::int64_t>(day - 1) * R;
    const std::int64_t day_end = static_cast<std::int64_t>(day) * R;

    for (const Deposit& d : s.run.deposits) {
      if (d.day != day) continue;
      ledger.deposit(d.account, d.amount);
      dr.deposits += d.amount;
    }
    rep.total_deposits += dr.deposits;
    dr.executed += ledger.retry_suspended(meter, day_start).size();

    for (std::size_t ci = 0; ci < s.cities.size(); ++ci) {
      const CityScenario& c = s.cities[ci];
      const std::string& name = c.market.name;
      const StackelbergOutcome& se = solved[ci].se;
      for (std::size_t j = 0; j < c.market.communities.size(); ++j) {
        const EnergySplit split = energy_split(c.market.chp, se.responses[j].dispatch);
        const std::string des = des_id(name, j);
        ledger.set_daily_capacity(des, {split.E_exc, split.Q_exc});
        const struct {
          std::string agg;
          EnergyKind kind;
          double price;
          double amount;
        } offers[] = {{"EA_" + name, EnergyKind::Electricity, se.prices.p_e, split.E_exc},
                      {"HA_" + name, EnergyKind::Heat, se.prices.p_h, split.Q_exc}};
        for (const auto& o : offers) {
          if (!(o.amount > 0.0)) continue;
          try {
            const Contract k = ledger.create_contract(o.agg, des, o.kind, o.price, o.amount, day_end,
                                                      day_start, sim.keys(), keys.at(o.agg), keys.at(des));
            sim.submit(k);
            pending.insert(k.id);
            ++dr.contracts_created;
          } catch (const LedgerError& e) {
            if (e.code() != LedgerErrc::InsufficientBalance &&
                e.code() != LedgerErrc::InsufficientCapacity)
              throw;
            ++dr.creation_failures;
          }
        }
      }
    }

    while (!pending.empty() && dr.rounds < s.run.rounds_per_day) {
      RoundOutcome o = sim.run_round();
      ++dr.rounds;
      if (o.safety_violation) ++rep.safety_violations;
      if (o.committed) {
        for (const Contract& k : o.committed->txs) {
          ledger.record_committed(k.id);
          commit_order.push_back(k.id);
          pending.erase(k.id);
        }
      }
      rep.outcomes.push_back(std::move(o));
    }

    for (const std::string& id : commit_order) {
      if (ledger.contract(id).state != ContractState::Verified) continue;
      ledger.execute_contract(id, true, day_end);
      if (ledger.contract(id).state == ContractState::Executed) ++dr.executed;
      else ++dr.suspended;
    }

    for (std::size_t i = 0; i < ids.size(); ++i) ledger.set_credit(ids[i], sim.credits()[i]);
    dr.total_balance = ledger.total_balance();
    rep.days.push_back(std::move(dr));
  }

  for (const auto& [id, k] : ledger.contracts()) {
    ++rep.contracts_total;
    if (k.state == ContractState::Executed) ++rep.contracts_executed;
    if (k.state == ContractState::Suspended) ++rep.contracts_suspended;
    if (k.state == ContractState::Created) ++rep.contracts_uncommitted;
  }
  for (const ConsensusNode& n : sim.nodes()) {
    if (n.honest()) {
      rep.chain = n.chain();
      break;
    }
  }
  rep.chain_audit = rep.chain.audit();
  rep.honest_chains_identical = sim.honest_chains_identical();
  rep.balance_drift = std::abs(ledger.total_balance() - rep.initial_total - rep.total_deposits);
  return rep;
}

}  // namespace bmet
