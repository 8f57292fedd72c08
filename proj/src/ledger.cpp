#include "bmet/ledger.hpp"

#include <cstdio>

namespace bmet {

std::string_view to_string(EnergyKind k) {
  return k == EnergyKind::Electricity ? "electricity" : "heat";
}

std::string_view to_string(ContractState s) {
  switch (s) {
    case ContractState::Created: return "Created";
    case ContractState::Verified: return "Verified";
    case ContractState::Executed: return "Executed";
    case ContractState::Rejected: return "Rejected";
    case ContractState::Suspended: return "Suspended";
  }
  return "?";
}

std::string_view to_string(LedgerErrc e) {
  switch (e) {
    case LedgerErrc::DuplicateId: return "DuplicateId";
    case LedgerErrc::UnknownAccount: return "UnknownAccount";
    case LedgerErrc::WrongRole: return "WrongRole";
    case LedgerErrc::CrossCityPair: return "CrossCityPair";
    case LedgerErrc::PriceOutOfBox: return "PriceOutOfBox";
    case LedgerErrc::InsufficientBalance: return "InsufficientBalance";
    case LedgerErrc::InsufficientCapacity: return "InsufficientCapacity";
    case LedgerErrc::NotCommitted: return "NotCommitted";
    case LedgerErrc::BadState: return "BadState";
    case LedgerErrc::NotYetDue: return "NotYetDue";
    case LedgerErrc::MeterRejected: return "MeterRejected";
  }
  return "?";
}

std::string Contract::signing_payload() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "|%.17g|%.17g|%lld|%lld|%llu", price, amount,
                static_cast<long long>(trans_time), static_cast<long long>(stime),
                static_cast<unsigned long long>(nonce));
  return "contract|" + aggregator + "|" + des + "|" + city + "|" + std::string(to_string(kind)) +
         buf;
}

std::string Contract::full_payload() const {
  return signing_payload() + "|" + to_hex(aggregator_sig) + "|" + to_hex(des_sig);
}

bool contract_signatures_valid(const Contract& c, const KeyRegistry& keys) {
  const std::string payload = c.signing_payload();
  return c.id == to_hex(sha256(payload)) && keys.verify(c.aggregator, payload, c.aggregator_sig) &&
         keys.verify(c.des, payload, c.des_sig);
}

std::pair<Account, KeyPair> Ledger::register_account(Role role, const std::string& id,
                                                     const std::string& city, KeyRegistry& keys,
                                                     double initial_balance) {
  if (accounts_.count(id)) throw LedgerError(LedgerErrc::DuplicateId, "account " + id);
  if (role == Role::Des && initial_balance < 0.0)
    throw std::invalid_argument("DES " + id + ": initial balance must be non-negative");
  KeyPair kp = keys.issue(id);
  Account a;
  a.id = id;
  a.city = city;
  a.address = kp.public_key;
  a.balance = initial_balance;
  a.role = role;
  a.credit = role == Role::Aggregator ? kInitialCredit : 0.0;
  accounts_.emplace(id, a);
  return {a, kp};
}

const Account& Ledger::account(const std::string& id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw LedgerError(LedgerErrc::UnknownAccount, id);
  return it->second;
}

Account& Ledger::mutable_account(const std::string& id) {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw LedgerError(LedgerErrc::UnknownAccount, id);
  return it->second;
}

double Ledger::total_balance() const {
  double s = 0.0;
  for (const auto& [id, a] : accounts_) s += a.balance;
  return s;
}

void Ledger::set_price_box(const std::string& city, Interval electricity, Interval heat) {
  price_boxes_[city] = {electricity, heat};
}

void Ledger::set_daily_capacity(const std::string& des, DailyCapacity cap) {
  if (account(des).role != Role::Des) throw LedgerError(LedgerErrc::WrongRole, des + " is not a DES");
  capacity_[des] = cap;
}

DailyCapacity Ledger::remaining_capacity(const std::string& des) const {
  auto it = capacity_.find(des);
  return it == capacity_.end() ? DailyCapacity{} : it->second;
}

Contract Ledger::create_contract(const std::string& aggregator, const std::string& des,
                                 EnergyKind kind, double price, double amount,
                                 std::int64_t trans_time, std::int64_t now,
                                 const KeyRegistry& keys, const KeyPair& aggregator_key,
                                 const KeyPair& des_key) {
  const Account& agg = account(aggregator);
  const Account& seller = account(des);
  if (agg.role != Role::Aggregator)
    throw LedgerError(LedgerErrc::WrongRole, aggregator + " is not an aggregator");
  if (seller.role != Role::Des) throw LedgerError(LedgerErrc::WrongRole, des + " is not a DES");
  if (agg.city != seller.city)
    throw LedgerError(LedgerErrc::CrossCityPair, aggregator + " (" + agg.city + ") and " + des +
                                                     " (" + seller.city + ")");
  if (!(amount >= 0.0) || !(price > 0.0))
    throw std::invalid_argument("contract: price must be positive and amount non-negative");
  if (auto it = price_boxes_.find(agg.city); it != price_boxes_.end()) {
    const Interval box = kind == EnergyKind::Electricity ? it->second.first : it->second.second;
    if (price < box.lo || price > box.hi)
      throw LedgerError(LedgerErrc::PriceOutOfBox, "price outside [" + std::to_string(box.lo) +
                                                       ", " + std::to_string(box.hi) + "]");
  }
  if (!(agg.balance >= price * amount))
    throw LedgerError(LedgerErrc::InsufficientBalance,
                      aggregator + " holds " + std::to_string(agg.balance) + ", needs " +
                          std::to_string(price * amount));
  DailyCapacity& cap = capacity_[des];
  double& left = kind == EnergyKind::Electricity ? cap.electricity : cap.heat;
  if (!(left >= amount))
    throw LedgerError(LedgerErrc::InsufficientCapacity,
                      des + " has " + std::to_string(left) + " J left, asked " +
                          std::to_string(amount));

  Contract c;
  c.aggregator = aggregator;
  c.des = des;
  c.city = agg.city;
  c.kind = kind;
  c.price = price;
  c.amount = amount;
  c.trans_time = trans_time;
  c.stime = now;
  c.nonce = contracts_.size();
  const std::string payload = c.signing_payload();
  c.id = to_hex(sha256(payload));
  if (contracts_.count(c.id)) throw LedgerError(LedgerErrc::DuplicateId, "contract " + c.id);
  c.aggregator_sig = sign(aggregator_key.secret_key, payload);
  c.des_sig = sign(des_key.secret_key, payload);
  if (!contract_signatures_valid(c, keys))
    throw std::invalid_argument("contract: key pair does not belong to its party");

  left -= amount;
  contracts_.emplace(c.id, c);
  return c;
}

bool Ledger::verify_contract(const Contract& c, const KeyRegistry& keys) const {
  if (!contract_signatures_valid(c, keys)) return false;
  auto a = accounts_.find(c.aggregator);
  auto d = accounts_.find(c.des);
  if (a == accounts_.end() || d == accounts_.end()) return false;
  if (a->second.role != Role::Aggregator || d->second.role != Role::Des) return false;
  if (a->second.city != c.city || d->second.city != c.city) return false;
  if (auto it = price_boxes_.find(c.city); it != price_boxes_.end()) {
    const Interval box = c.kind == EnergyKind::Electricity ? it->second.first : it->second.second;
    if (c.price < box.lo || c.price > box.hi) return false;
  }
  return true;
}

const Contract& Ledger::contract(const std::string& id) const {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw std::out_of_range("unknown contract " + id);
  return it->second;
}

void Ledger::record_committed(const std::string& id) {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw std::out_of_range("unknown contract " + id);
  if (it->second.state != ContractState::Created)
    throw LedgerError(LedgerErrc::BadState,
                      "commit of " + id + " in state " + std::string(to_string(it->second.state)));
  it->second.state = ContractState::Verified;
  commit_order_.push_back(id);
}

void Ledger::reject_contract(const std::string& id) {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw std::out_of_range("unknown contract " + id);
  Contract& c = it->second;
  if (c.state != ContractState::Created)
    throw LedgerError(LedgerErrc::BadState,
                      "reject of " + id + " in state " + std::string(to_string(c.state)));
  c.state = ContractState::Rejected;
  DailyCapacity& cap = capacity_[c.des];
  (c.kind == EnergyKind::Electricity ? cap.electricity : cap.heat) += c.amount;
}

std::vector<Transfer> Ledger::execute_contract(const std::string& id, bool meter_confirmed,
                                               std::int64_t now) {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw std::out_of_range("unknown contract " + id);
  Contract& c = it->second;
  if (c.state == ContractState::Created)
    throw LedgerError(LedgerErrc::NotCommitted, id + " is not in a committed block");
  if (c.state != ContractState::Verified && c.state != ContractState::Suspended)
    throw LedgerError(LedgerErrc::BadState, id + " is " + std::string(to_string(c.state)));
  if (now < c.trans_time)
    throw LedgerError(LedgerErrc::NotYetDue,
                      id + " due at " + std::to_string(c.trans_time) + ", now " + std::to_string(now));

  Account& payer = mutable_account(c.aggregator);
  if (payer.balance < 0.0) {
    c.state = ContractState::Suspended;
    return {};
  }
  if (!meter_confirmed) throw LedgerError(LedgerErrc::MeterRejected, id);

  Account& payee = mutable_account(c.des);
  const double v = c.value();
  payer.balance -= v;
  payee.balance += v;
  c.state = ContractState::Executed;
  return {{payer.id, -v}, {payee.id, v}};
}

std::vector<std::string> Ledger::retry_suspended(
    const std::function<bool(const Contract&)>& meter, std::int64_t now) {
  std::vector<std::string> done;
  for (const std::string& id : commit_order_) {
    Contract& c = contracts_.at(id);
    if (c.state != ContractState::Suspended) continue;
    if (account(c.aggregator).balance < 0.0) continue;
    try {
      execute_contract(id, meter(c), now);
    } catch (const LedgerError& e) {
      if (e.code() != LedgerErrc::MeterRejected) throw;
      continue;
    }
    if (c.state == ContractState::Executed) done.push_back(id);
  }
  return done;
}

void Ledger::deposit(const std::string& id, double amount) {
  if (!(amount >= 0.0)) throw std::invalid_argument("deposit must be non-negative");
  mutable_account(id).balance += amount;
}

void Ledger::set_credit(const std::string& id, double credit) {
  Account& a = mutable_account(id);
  if (a.role != Role::Aggregator) throw LedgerError(LedgerErrc::WrongRole, id + " has no credit");
  if (!(credit >= 0.0 && credit <= 1.0)) throw std::invalid_argument("credit outside [0, 1]");
  a.credit = credit;
}

}  // namespace bmet
