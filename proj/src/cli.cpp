#include "bmet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bmet/consensus.hpp"
#include "bmet/equilibrium.hpp"
#include "bmet/full_run.hpp"
#include "bmet/scenario.hpp"

namespace bmet {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

Scenario load(const CliOptions& opt) {
  Scenario s = load_scenario(opt.scenario);
  if (opt.seed) s.run.seed = *opt.seed;
  s.validate();
  std::filesystem::create_directories(opt.out_dir);
  return s;
}

std::string votes_csv(const std::vector<RoundOutcome>& outcomes, const std::vector<std::string>& ids,
                      const FaultProfile& profile) {
  std::ostringstream os;
  os << "round,node,behavior,vote,credit_delta\n";
  for (const RoundOutcome& o : outcomes)
    for (std::size_t i = 0; i < ids.size(); ++i)
      os << o.round << ',' << ids[i] << ',' << to_string(profile.behaviors[i]) << ','
         << (i == o.leader ? "leader" : to_string(o.votes[i])) << ',' << num(o.credit_deltas[i]) << '\n';
  return os.str();
}

std::string se_csv(const CityMarket& city, const StackelbergOutcome& se) {
  std::ostringstream os;
  os << "community,k_e,k_h,M_min,alpha,beta,kkt_case,utility,E_exc,Q_exc\n";
  for (std::size_t j = 0; j < se.responses.size(); ++j) {
    const CommunityParams& c = city.communities[j];
    const Dispatch d = se.responses[j].dispatch;
    const EnergySplit sp = energy_split(city.chp, d);
    os << j + 1 << ',' << num(c.k_e) << ',' << num(c.k_h) << ',' << num(c.M_min) << ',' << num(d.alpha)
       << ',' << num(d.beta) << ',' << to_string(se.responses[j].kkt_case) << ',' << num(se.utilities[j])
       << ',' << num(sp.E_exc) << ',' << num(sp.Q_exc) << '\n';
  }
  return os.str();
}

}  // namespace

int cmd_equilibrium(const CliOptions& opt, std::ostream& out) {
  const Scenario s = load(opt);
  if (s.cities.empty()) throw ScenarioError("equilibrium needs at least one [market]");
  const std::filesystem::path dir(opt.out_dir);

  std::ostringstream report;
  report << "city,init,p_e,p_h,iterations,final_step,v_e,v_h\n";
  for (const CityScenario& c : s.cities) {
    std::vector<NeResult> results;
    for (NeInit init : s.run.inits) {
      NeConfig cfg = s.run.ne;
      cfg.init = init;
      cfg.record_trace = true;
      NeResult r = find_ne(c.market, cfg);
      const StackelbergOutcome se = stackelberg_outcome(c.market, r.prices);

      std::ostringstream trace;
      trace << "iteration,p_e,p_h,v_e,v_h,step,gain_e,gain_h\n";
      for (const NeStep& st : r.trace)
        trace << st.iteration << ',' << num(st.p_e) << ',' << num(st.p_h) << ',' << num(st.v_e) << ','
              << num(st.v_h) << ',' << num(st.step) << ',' << num(st.gain_e) << ',' << num(st.gain_h)
              << '\n';
      write_file(dir / ("ne_trace_" + c.market.name + "_" + to_string(init) + ".csv"), trace.str());
      if (results.empty()) write_file(dir / ("se_" + c.market.name + ".csv"), se_csv(c.market, se));

      report << c.market.name << ',' << to_string(init) << ',' << num(r.prices.p_e) << ','
             << num(r.prices.p_h) << ',' << r.iterations << ',' << num(r.final_step) << ','
             << num(se.v_e) << ',' << num(se.v_h) << '\n';
      char line[200];
      std::snprintf(line, sizeof line, "%s %-10s p_e=%.6e p_h=%.6e iterations=%lld V_e=%.4f V_h=%.4f\n",
                    c.market.name.c_str(), to_string(init).c_str(), r.prices.p_e, r.prices.p_h,
                    static_cast<long long>(r.iterations), se.v_e, se.v_h);
      out << line;
      results.push_back(std::move(r));
    }
    if (results.size() > 1) {
      double step = results.front().final_step, spread = 0.0;
      for (const NeResult& r : results) {
        step = std::min(step, r.final_step);
        spread = std::max({spread, std::abs(r.prices.p_e - results.front().prices.p_e),
                           std::abs(r.prices.p_h - results.front().prices.p_h)});
      }
      char line[160];
      std::snprintf(line, sizeof line, "%s inits agree: spread=%.3e bound=2*step=%.3e %s\n",
                    c.market.name.c_str(), spread, 2.0 * step, spread <= 2.0 * step ? "yes" : "no");
      out << line;
    }
  }
  write_file(dir / "equilibrium_report.csv", report.str());
  return kExitOk;
}

int cmd_consensus(const CliOptions& opt, std::ostream& out) {
  const Scenario s = load(opt);
  if (!s.has_consensus) throw ScenarioError("consensus needs a [consensus] section");
  const std::vector<std::string> ids = standalone_ids(s.consensus.nodes);
  const FaultProfile profile = resolve_profile(s.consensus, ids);
  Simulation sim(ids, profile, s.consensus.config, s.run.seed);
  const RunResult r = run_rounds(sim, s.run.rounds);

  const std::filesystem::path dir(opt.out_dir);
  write_file(dir / "round_log.csv", round_log_csv(r.outcomes, s.run.seed));
  if (opt.trace) write_file(dir / "votes.csv", votes_csv(r.outcomes, ids, profile));

  const bool identical = sim.honest_chains_identical();
  char line[240];
  std::snprintf(line, sizeof line,
                "nodes=%zu faulty=%zu rounds=%zu committed=%zu mean_prepare_msgs_needed=%.3f "
                "safety_violations=%zu honest_chains_identical=%s\n",
                ids.size(), profile.faulty_count(), r.metrics.rounds, r.metrics.committed_blocks,
                r.metrics.mean_prepare_msgs_needed, r.metrics.safety_violations, identical ? "yes" : "no");
  out << line;
  return r.metrics.safety_violations == 0 && identical ? kExitOk : kExitSafety;
}

int cmd_full(const CliOptions& opt, std::ostream& out) {
  const Scenario s = load(opt);
  const FullReport rep = run_full(s);
  const std::filesystem::path dir(opt.out_dir);

  write_file(dir / "chain.txt", rep.chain.export_text(rep.seed));
  write_file(dir / "round_log.csv", round_log_csv(rep.outcomes, rep.seed));
  if (opt.trace) {
    const std::vector<std::string> ids = aggregator_ids(s);
    write_file(dir / "votes.csv", votes_csv(rep.outcomes, ids, resolve_profile(s.consensus, ids)));
  }

  std::ostringstream bal;
  bal << "account,city,role,balance,credit\n";
  for (const auto& [id, a] : rep.ledger.accounts())
    bal << id << ',' << a.city << ',' << (a.role == Role::Des ? "DES" : "Aggregator") << ','
        << num(a.balance) << ',' << num(a.credit) << '\n';
  write_file(dir / "balances.csv", bal.str());

  std::ostringstream con;
  con << "id,city,aggregator,des,kind,price,amount,trans_time,state\n";
  for (const auto& [id, k] : rep.ledger.contracts())
    con << id << ',' << k.city << ',' << k.aggregator << ',' << k.des << ',' << to_string(k.kind) << ','
        << num(k.price) << ',' << num(k.amount) << ',' << k.trans_time << ',' << to_string(k.state) << '\n';
  write_file(dir / "contracts.csv", con.str());

  std::ostringstream mk;
  mk << "day,city,p_e,p_h,iterations,v_e,v_h,contracts_created,creation_failures,rounds,executed,"
        "suspended,deposits,total_balance\n";
  for (const DayReport& d : rep.days)
    for (const CityDay& c : d.cities)
      mk << d.day << ',' << c.city << ',' << num(c.ne.prices.p_e) << ',' << num(c.ne.prices.p_h) << ','
         << c.ne.iterations << ',' << num(c.se.v_e) << ',' << num(c.se.v_h) << ',' << d.contracts_created
         << ',' << d.creation_failures << ',' << d.rounds << ',' << d.executed << ',' << d.suspended << ','
         << num(d.deposits) << ',' << num(d.total_balance) << '\n';
  write_file(dir / "market_report.csv", mk.str());

  char line[300];
  std::snprintf(line, sizeof line,
                "days=%zu contracts=%zu executed=%zu suspended=%zu uncommitted=%zu blocks=%llu "
                "balance_drift=%.3e chain_audit=%s safety_violations=%zu\n",
                rep.days.size(), rep.contracts_total, rep.contracts_executed, rep.contracts_suspended,
                rep.contracts_uncommitted, static_cast<unsigned long long>(rep.chain.height()),
                rep.balance_drift, rep.chain_audit ? "pass" : "fail", rep.safety_violations);
  out << line;
  return rep.safety_violations == 0 && rep.honest_chains_identical ? kExitOk : kExitSafety;
}

int run_command(const std::string& subcommand, const CliOptions& opt, std::ostream& out,
                std::ostream& err) {
  try {
    if (subcommand == "equilibrium") return cmd_equilibrium(opt, out);
    if (subcommand == "consensus") return cmd_consensus(opt, out);
    if (subcommand == "full") return cmd_full(opt, out);
    err << "unknown subcommand '" << subcommand << "'\n";
    return kExitValidation;
  } catch (const ConsensusError& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ConsensusErrc::TooFewNodes ? kExitValidation : kExitRuntime;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace bmet
