#include "bmet/scenario.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace bmet {

std::string to_string(NeInit init) {
  switch (init) {
    case NeInit::LowCorner: return "LowCorner";
    case NeInit::HighCorner: return "HighCorner";
    case NeInit::Midpoint: return "Midpoint";
    case NeInit::Explicit: return "Explicit";
  }
  return "?";
}

NeInit parse_init(const std::string& s) {
  for (NeInit i : {NeInit::LowCorner, NeInit::HighCorner, NeInit::Midpoint, NeInit::Explicit})
    if (to_string(i) == s) return i;
  throw ScenarioError("unknown init '" + s + "' (LowCorner, HighCorner, Midpoint, Explicit)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (auto t = trim(cur); !t.empty()) out.push_back(t);
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

class Parser {
 public:
  Parser(std::string source) : source_(std::move(source)) {}

  Scenario parse(std::istream& in) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::string s = raw;
      if (auto c = s.find_first_of("#;"); c != std::string::npos) s.erase(c);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail("unterminated section header");
        open_section(trim(s.substr(1, s.size() - 2)));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail("expected key = value");
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (key.empty()) fail("empty key");
      if (section_.empty()) fail("key '" + key + "' outside any section");
      if (key != "deposit" && !seen_.insert(key).second) fail("duplicate key '" + key + "'");
      assign(key, value);
    }
    finish_community();
    return std::move(sc_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ScenarioError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  double number(const std::string& key, const std::string& v) const {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
      fail("key '" + key + "': '" + v + "' is not a number");
    return x;
  }

  std::uint64_t count(const std::string& key, const std::string& v) const {
    errno = 0;
    char* end = nullptr;
    if (v.empty() || v.front() == '-') fail("key '" + key + "': '" + v + "' is not a non-negative integer");
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE)
      fail("key '" + key + "': '" + v + "' is not a non-negative integer");
    return x;
  }

  void open_section(const std::string& name) {
    finish_community();
    seen_.clear();
    section_ = name;
    if (name == "market") {
      sc_.cities.emplace_back();
    } else if (name == "communities") {
      if (sc_.cities.empty()) fail("[communities] before any [market]");
      sc_.cities.back().market.communities.emplace_back();
      pending_mix_.reset();
      in_community_ = true;
    } else if (name == "consensus") {
      if (consensus_seen_) fail("[consensus] given twice");
      consensus_seen_ = true;
      sc_.has_consensus = true;
    } else if (name == "faults" || name == "run") {
      if (!singles_.insert(name).second) fail("[" + name + "] given twice");
    } else {
      fail("unknown section [" + name + "]");
    }
  }

  void finish_community() {
    if (!in_community_) return;
    in_community_ = false;
    if (!pending_mix_) return;
    CityScenario& city = sc_.cities.back();
    city.market.communities.back().M_min = mixed_min_requirement(city.market.chp, *pending_mix_);
  }

  void assign(const std::string& key, const std::string& v) {
    if (section_ == "market") return assign_market(key, v);
    if (section_ == "communities") return assign_community(key, v);
    if (section_ == "consensus") return assign_consensus(key, v);
    if (section_ == "faults") {
      auto b = parse_behavior(v);
      if (!b) fail("node " + key + ": unknown behavior '" + v + "'");
      sc_.consensus.faults[key] = *b;
      return;
    }
    assign_run(key, v);
  }

  void assign_market(const std::string& key, const std::string& v) {
    CityScenario& c = sc_.cities.back();
    ChpParams& chp = c.market.chp;
    if (key == "name") {
      if (v.empty() || v.find_first_of(" \t,") != std::string::npos) fail("market name must be one word");
      c.market.name = v;
    } else if (key == "r_e") c.market.r_e = number(key, v);
    else if (key == "r_h") c.market.r_h = number(key, v);
    else if (key == "q") chp.q = number(key, v);
    else if (key == "eta_g") chp.eta_g = number(key, v);
    else if (key == "eta_r") chp.eta_r = number(key, v);
    else if (key == "F_m") chp.F_m = number(key, v);
    else if (key == "c_f") chp.c_f = number(key, v);
    else if (key == "balance_ea") c.balance_ea = number(key, v);
    else if (key == "balance_ha") c.balance_ha = number(key, v);
    else fail("unknown key '" + key + "' in [market]");
  }

  void assign_community(const std::string& key, const std::string& v) {
    CommunityParams& k = sc_.cities.back().market.communities.back();
    if (key == "k_e") k.k_e = number(key, v);
    else if (key == "k_h") k.k_h = number(key, v);
    else if (key == "M_min" || key == "M_min_mix") {
      if (seen_.count("M_min") && seen_.count("M_min_mix")) fail("give M_min or M_min_mix, not both");
      if (key == "M_min") k.M_min = number(key, v);
      else pending_mix_ = number(key, v);
    } else fail("unknown key '" + key + "' in [communities]");
  }

  void assign_consensus(const std::string& key, const std::string& v) {
    ConsensusScenario& cs = sc_.consensus;
    if (key == "nodes") cs.nodes = count(key, v);
    else if (key == "delta1") cs.config.credit.delta1 = number(key, v);
    else if (key == "delta2") cs.config.credit.delta2 = number(key, v);
    else if (key == "max_block_txs") cs.config.max_block_txs = count(key, v);
    else if (key == "round_timeout") cs.config.round_timeout = static_cast<std::int64_t>(count(key, v));
    else if (key == "drop_probability") cs.profile.drop_probability = number(key, v);
    else if (key == "delay_min") cs.profile.delay.min = static_cast<std::int64_t>(count(key, v));
    else if (key == "delay_max") cs.profile.delay.max = static_cast<std::int64_t>(count(key, v));
    else fail("unknown key '" + key + "' in [consensus]");
  }

  void assign_run(const std::string& key, const std::string& v) {
    RunScenario& r = sc_.run;
    if (key == "seed") r.seed = count(key, v);
    else if (key == "inits") {
      r.inits.clear();
      for (const std::string& s : split(v, ',')) {
        try {
          r.inits.push_back(parse_init(s));
        } catch (const ScenarioError& e) {
          fail(e.what());
        }
      }
      if (r.inits.empty()) fail("inits is empty");
    } else if (key == "delta0") r.ne.delta0 = number(key, v);
    else if (key == "decay") r.ne.decay = number(key, v);
    else if (key == "max_iters") r.ne.max_iters = static_cast<std::int64_t>(count(key, v));
    else if (key == "p_e0") r.ne.explicit_start.p_e = number(key, v);
    else if (key == "p_h0") r.ne.explicit_start.p_h = number(key, v);
    else if (key == "rounds") r.rounds = count(key, v);
    else if (key == "days") r.days = count(key, v);
    else if (key == "rounds_per_day") r.rounds_per_day = count(key, v);
    else if (key == "deposit") {
      const auto w = words(v);
      if (w.size() != 3) fail("deposit expects '<day> <account> <amount>'");
      r.deposits.push_back({static_cast<std::size_t>(count(key, w[0])), w[1], number(key, w[2])});
    } else fail("unknown key '" + key + "' in [run]");
  }

  std::string source_;
  std::size_t line_ = 0;
  std::string section_;
  std::set<std::string> seen_;
  std::set<std::string> singles_;
  bool consensus_seen_ = false;
  bool in_community_ = false;
  std::optional<double> pending_mix_;
  Scenario sc_;
};

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& source) {
  return Parser(source).parse(in);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  return parse_scenario(in, path);
}

void Scenario::validate() const {
  std::set<std::string> names;
  for (const CityScenario& c : cities) {
    if (!names.insert(c.market.name).second) throw ScenarioError("duplicate market name " + c.market.name);
    c.market.validate();
    if (c.balance_ea < 0.0 || c.balance_ha < 0.0)
      throw ScenarioError(c.market.name + ": initial balances must be non-negative");
  }
  run.ne.validate();
  if (has_consensus) {
    consensus.config.credit.validate();
    consensus.profile.validate();
    if (consensus.config.max_block_txs == 0) throw ScenarioError("max_block_txs must be positive");
  }
  if (run.rounds_per_day == 0) throw ScenarioError("rounds_per_day must be positive");
  for (const Deposit& d : run.deposits)
    if (d.day == 0 || !(d.amount >= 0.0))
      throw ScenarioError("deposit for " + d.account + ": day must be >= 1 and amount >= 0");
}

std::vector<std::string> standalone_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("N" + std::to_string(i));
  return ids;
}

std::vector<std::string> aggregator_ids(const Scenario& s) {
  std::vector<std::string> ids;
  for (const CityScenario& c : s.cities) {
    ids.push_back("EA_" + c.market.name);
    ids.push_back("HA_" + c.market.name);
  }
  return ids;
}

FaultProfile resolve_profile(const ConsensusScenario& cs, const std::vector<std::string>& ids) {
  FaultProfile p = cs.profile;
  p.behaviors.assign(ids.size(), Behavior::Honest);
  for (const auto& [id, b] : cs.faults) {
    std::size_t i = 0;
    while (i < ids.size() && ids[i] != id) ++i;
    if (i == ids.size()) throw ScenarioError("[faults] names unknown node " + id);
    p.behaviors[i] = b;
  }
  return p;
}

}  // namespace bmet
