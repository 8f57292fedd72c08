// Acceptance harness: one PASS/FAIL line per criterion.
// Usage: bmet_acceptance [--only N]

#include <chrono>
#include <cstdarg>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bmet/consensus.hpp"
#include "bmet/equilibrium.hpp"
#include "bmet/follower.hpp"
#include "bmet/full_run.hpp"
#include "bmet/leader.hpp"
#include "bmet/market.hpp"
#include "bmet/scenario.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bmet;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool within_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

Verdict constants() {
  const ChpParams chp = oracle::reference_chp();
  const KIntervals k = valid_k_intervals(chp, oracle::kRefRe, oracle::kRefRh);
  const std::vector<std::pair<double, double>> checks{
      {chp.electricity_cost(), 3.00e-8}, {chp.heat_cost(), 3.75e-8},
      {chp.electricity_adaption(), 4.773e-10}, {chp.heat_adaption(), 5.966e-10},
      {k.k_e.lo, 115.24}, {k.k_e.hi, 170.85}, {k.k_h.lo, 104.76}, {k.k_h.hi, 170.85}};
  double worst = 0.0;
  for (auto [got, want] : checks) worst = std::max(worst, std::abs(got - want) / want);
  return {worst <= 1e-3, fmt("worst relative error %.2e (k_e %.4f..%.4f, k_h %.4f..%.4f)", worst, k.k_e.lo,
                             k.k_e.hi, k.k_h.lo, k.k_h.hi)};
}

Verdict stationary_dispatch() {
  const ChpParams chp = oracle::reference_chp();
  const PricePair p{4.5e-8, 4.5e-8};
  const Dispatch a = interior_stationary(chp, {143.05, 137.81, 0.0}, p);
  const Dispatch b = interior_stationary(chp, {159.73, 117.98, 0.0}, p);
  const double err = std::max({std::abs(a.alpha - 0.301), std::abs(a.beta - 0.481), std::abs(b.alpha - 0.404),
                               std::abs(b.beta - 0.328)});
  return {err <= 1e-3, fmt("(%.4f, %.4f) and (%.4f, %.4f), max error %.2e", a.alpha, a.beta, b.alpha, b.beta, err)};
}

Verdict kkt_oracle() {
  std::mt19937_64 rng(20240501);
  const ChpParams chp = oracle::reference_chp();
  double worst = -INFINITY;
  int checked = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto [ke, kh] = fixture::random_k(rng);
    const PricePair p = fixture::random_prices(rng);
    const double w = oracle::uniform(rng, 0.0, 1.0);
    for (double M : {0.0, mixed_min_requirement(chp, w)}) {
      const CommunityParams comm{ke, kh, M};
      const Dispatch d = best_response(chp, comm, p).dispatch;
      const double u = oracle::utility(chp, ke, kh, p.p_e, p.p_h, d.alpha, d.beta);
      const double grid = oracle::grid_best_utility(chp, ke, kh, M, p.p_e, p.p_h, 1000);
      worst = std::max(worst, grid - u);
      ++checked;
    }
  }
  return {worst <= 1e-9, fmt("%d cases, max(grid - best_response) = %.3e", checked, worst)};
}

Verdict case4_exclusion() {
  std::mt19937_64 rng(44);
  const ChpParams chp = oracle::reference_chp();
  int both = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto [ke, kh] = fixture::random_k(rng);
    const PricePair p = fixture::random_prices(rng);
    const double M = i % 2 ? mixed_min_requirement(chp, oracle::uniform(rng, 0.0, 1.0)) : 0.0;
    const Dispatch d = best_response(chp, {ke, kh, M}, p).dispatch;
    if (d.alpha >= 1.0 - kSaturationTol && d.beta >= 1.0 - kSaturationTol) ++both;
  }
  return {both == 0, fmt("10000 draws, %d returned (1,1)", both)};
}

Verdict concavity() {
  std::mt19937_64 rng(55);
  double worst_rel = -INFINITY;
  int failures = 0, probes = 0;
  for (int s = 0; s < 20; ++s) {
    const int n = 1 + static_cast<int>(rng() % 5);
    std::vector<std::pair<double, double>> ks;
    for (int j = 0; j < n; ++j) ks.push_back(fixture::random_k(rng));
    const double p_h = fixture::random_prices(rng).p_h;
    for (double mix : {0.7, 0.5}) {
      const CityMarket city = fixture::city(ks, mix);
      const ConcavityReport r = concavity_probe(city, Aggregator::Electricity, p_h, 101);
      const double rel = r.worst_second_difference / r.profit_scale;
      worst_rel = std::max(worst_rel, rel);
      failures += rel > 1e-6;
      ++probes;
    }
  }
  return {failures == 0, fmt("%d/%d probes exceed 1e-6; worst relative second difference %.3e", failures,
                             probes, worst_rel)};
}

Verdict decoupled_ne() {
  const CityMarket city = fixture::city({{143.05, 137.81}});
  const ChpParams& chp = city.chp;
  const double pe = oracle::decoupled_price(city.r_e, 143.05, chp.electricity_output(), chp.electricity_adaption());
  const double ph = oracle::decoupled_price(city.r_h, 137.81, chp.heat_output(), chp.heat_adaption());
  NeConfig cfg;
  cfg.record_trace = false;
  const NeResult r = find_ne(city, cfg);
  const double err = std::max(std::abs(r.prices.p_e - pe), std::abs(r.prices.p_h - ph));
  const bool printed = within_rel(pe, 3.7168e-8, 2e-5) && within_rel(ph, 4.3479e-8, 2e-5);
  return {err <= 2.0 * r.final_step && printed,
          fmt("NE (%.5e, %.5e), closed form (%.5e, %.5e), error %.2e vs 2*step %.2e", r.prices.p_e, r.prices.p_h,
              pe, ph, err, 2.0 * r.final_step)};
}

Verdict init_independence() {
  const CityMarket city = fixture::five_communities(0.7);
  std::vector<NeResult> runs;
  for (NeInit init : {NeInit::LowCorner, NeInit::HighCorner, NeInit::Midpoint}) {
    NeConfig cfg;
    cfg.init = init;
    cfg.record_trace = false;
    runs.push_back(find_ne(city, cfg));
  }
  double step = INFINITY, spread = 0.0;
  for (const NeResult& r : runs) {
    step = std::min(step, r.final_step);
    for (const NeResult& o : runs)
      spread = std::max({spread, std::abs(r.prices.p_e - o.prices.p_e), std::abs(r.prices.p_h - o.prices.p_h)});
  }
  const auto high = runs[1].iterations;
  return {spread <= 2.0 * step && high >= 50 && high <= 500,
          fmt("spread %.3e vs 2*step %.3e; iterations low/high/mid = %lld/%lld/%lld", spread, 2.0 * step,
              static_cast<long long>(runs[0].iterations), static_cast<long long>(high),
              static_cast<long long>(runs[2].iterations))};
}

std::int64_t settle_iteration(const NeResult& r, double tol) {
  std::int64_t settled = 0;
  for (const NeStep& s : r.trace)
    if (std::abs(s.p_e - r.prices.p_e) > tol || std::abs(s.p_h - r.prices.p_h) > tol) settled = s.iteration;
  return settled + 1;
}

Verdict step_size() {
  const CityMarket city = fixture::five_communities(0.5);
  std::vector<std::int64_t> settle;
  for (double d0 : {1e-9, 1e-10}) {
    NeConfig cfg;
    cfg.delta0 = d0;
    settle.push_back(settle_iteration(find_ne(city, cfg), 1e-9));
  }
  return {settle[0] < settle[1],
          fmt("iterations to settle within 1e-9: delta0=1e-9 -> %lld, delta0=1e-10 -> %lld",
              static_cast<long long>(settle[0]), static_cast<long long>(settle[1]))};
}

struct MixedRun {
  Simulation sim;
  RunResult result;
};

const MixedRun& mixed_faults_run() {
  static MixedRun run = [] {
    const Scenario s = load_scenario(std::string(BMET_SCENARIO_DIR) + "/consensus_mixed_faults.ini");
    const auto ids = standalone_ids(s.consensus.nodes);
    Simulation sim(ids, resolve_profile(s.consensus, ids), s.consensus.config, s.run.seed);
    RunResult r = run_rounds(sim, s.run.rounds);
    return MixedRun{std::move(sim), std::move(r)};
  }();
  return run;
}

Verdict consensus_safety() {
  const MixedRun& run = mixed_faults_run();
  const FaultProfile& p = run.sim.profile();
  Simulation control(standalone_ids(20), FaultProfile::all_honest(20), {}, run.sim.seed());
  const RunResult c = run_rounds(control, 1000);
  const bool ok = p.behaviors.size() == 20 && p.faulty_count() == 6 && run.result.metrics.rounds == 1000 &&
                  run.result.metrics.safety_violations == 0 && run.sim.honest_chains_identical() &&
                  c.metrics.committed_blocks == 1000 && control.honest_chains_identical();
  return {ok, fmt("mixed: %zu/%zu committed, %zu divergent commits; control: %zu/1000 committed",
                  run.result.metrics.committed_blocks, run.result.metrics.rounds,
                  run.result.metrics.safety_violations, c.metrics.committed_blocks)};
}

Verdict credit_dynamics() {
  const MixedRun& run = mixed_faults_run();
  const FaultProfile& p = run.sim.profile();
  const CreditTable& credits = run.sim.credits();
  bool ok = true;
  double min_honest = 1.0, max_dissenter = 0.0;
  for (std::size_t i = 0; i < p.behaviors.size(); ++i) {
    if (p.behaviors[i] == Behavior::Honest) {
      ok &= credits[i] == 1.0;
      min_honest = std::min(min_honest, credits[i]);
    } else if (p.behaviors[i] == Behavior::Dissenter) {
      ok &= credits[i] == 0.0;
      max_dissenter = std::max(max_dissenter, credits[i]);
    }
  }
  std::size_t prev = SIZE_MAX, increases = 0, missing = 0, first = 0, last = 0;
  for (const RoundOutcome& o : run.result.outcomes) {
    if (!o.prepare_msgs_needed) {
      ++missing;
      continue;
    }
    const std::size_t q = *o.prepare_msgs_needed;
    if (prev == SIZE_MAX) first = q;
    if (prev != SIZE_MAX && q > prev) ++increases;
    prev = last = q;
  }
  ok &= increases == 0 && missing == 0;
  return {ok, fmt("min honest credit %.3f, max dissenter credit %.3f; quorum size %zu -> %zu, %zu increases",
                  min_honest, max_dissenter, first, last, increases)};
}

Verdict conservation() {
  Scenario s = load_scenario(std::string(BMET_SCENARIO_DIR) + "/full_two_cities.ini");
  s.validate();
  const FullReport r = run_full(s);
  const bool ok = s.cities.size() == 2 && r.days.size() == 3 && s.consensus.faults.empty() &&
                  r.balance_drift <= 1e-6 && r.contracts_total > 0 &&
                  r.contracts_executed == r.contracts_total && r.chain_audit;
  return {ok, fmt("drift %.3e, %zu/%zu contracts executed, chain audit %s", r.balance_drift,
                  r.contracts_executed, r.contracts_total, r.chain_audit ? "pass" : "fail")};
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"constant reproduction", constants},
      {"stationary dispatch", stationary_dispatch},
      {"KKT oracle equivalence", kkt_oracle},
      {"case-4 exclusion", case4_exclusion},
      {"concavity of V_e", concavity},
      {"decoupled NE closed form", decoupled_ne},
      {"init independence", init_independence},
      {"step-size behavior", step_size},
      {"consensus safety", consensus_safety},
      {"credit dynamics", credit_dynamics},
      {"end-to-end conservation", conservation},
  };
  std::size_t only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--only") == 0) {
    only = std::strtoul(argv[2], nullptr, 10);
    if (only < 1 || only > criteria.size()) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", criteria.size());
      return 2;
    }
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
    return 2;
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2zu %-26s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
