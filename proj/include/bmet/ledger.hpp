#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bmet/crypto.hpp"
#include "bmet/market.hpp"

namespace bmet {

enum class Role { Des, Aggregator };
enum class EnergyKind { Electricity, Heat };
enum class ContractState { Created, Verified, Executed, Rejected, Suspended };

std::string_view to_string(EnergyKind k);
std::string_view to_string(ContractState s);

/// Initial credit of every aggregator.
inline constexpr double kInitialCredit = 0.5;

struct Account {
  std::string id;
  std::string city;
  std::string address;
  double balance = 0.0;
  double credit = 0.0;  ///< meaningful for aggregators only
  Role role = Role::Des;
};

/// A dual-signed purchase of `amount` J of one energy kind at `price`.
struct Contract {
  std::string id;  ///< hex digest of signing_payload()
  std::string aggregator;
  std::string des;
  std::string city;
  EnergyKind kind = EnergyKind::Electricity;
  double price = 0.0;
  double amount = 0.0;
  std::int64_t trans_time = 0;
  std::int64_t stime = 0;
  std::uint64_t nonce = 0;  ///< per-ledger sequence number; keeps ids unique
  Hash256 aggregator_sig{};
  Hash256 des_sig{};
  ContractState state = ContractState::Created;

  double value() const { return price * amount; }

  /// Canonical encoding of the agreed terms; what both parties sign.
  std::string signing_payload() const;
  /// Terms plus signatures; two contracts are the same transaction iff these match.
  std::string full_payload() const;
};

enum class LedgerErrc {
  DuplicateId,
  UnknownAccount,
  WrongRole,
  CrossCityPair,
  PriceOutOfBox,
  InsufficientBalance,
  InsufficientCapacity,
  NotCommitted,
  BadState,
  NotYetDue,
  MeterRejected,
};

std::string_view to_string(LedgerErrc e);

/// Id and both signatures check out. Needs no ledger state, so every
/// consensus node can run it against its own copy.
bool contract_signatures_valid(const Contract& c, const KeyRegistry& keys);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  LedgerErrc code() const { return code_; }

 private:
  LedgerErrc code_;
};

struct Transfer {
  std::string account;
  double delta = 0.0;
};

struct DailyCapacity {
  double electricity = 0.0;
  double heat = 0.0;
};

/// Account and contract state of the smart-contract layer.
class Ledger {
 public:
  /// Registers an account and issues its key pair. Aggregators start with
  /// kInitialCredit.
  std::pair<Account, KeyPair> register_account(Role role, const std::string& id,
                                               const std::string& city, KeyRegistry& keys,
                                               double initial_balance = 0.0);

  const Account& account(const std::string& id) const;
  bool has_account(const std::string& id) const { return accounts_.count(id) != 0; }
  const std::map<std::string, Account>& accounts() const { return accounts_; }
  double total_balance() const;

  void set_price_box(const std::string& city, Interval electricity, Interval heat);
  /// Resets a DES's sellable energy for the current day.
  void set_daily_capacity(const std::string& des, DailyCapacity cap);
  DailyCapacity remaining_capacity(const std::string& des) const;

  /// Creates, checks and dual-signs a contract, reserving the seller's
  /// capacity. Requires balance >= price * amount at creation.
  Contract create_contract(const std::string& aggregator, const std::string& des,
                           EnergyKind kind, double price, double amount, std::int64_t trans_time,
                           std::int64_t now, const KeyRegistry& keys, const KeyPair& aggregator_key,
                           const KeyPair& des_key);

  /// Signatures plus parties, city and price box.
  bool verify_contract(const Contract& c, const KeyRegistry& keys) const;

  /// Marks a contract as committed by consensus (Created -> Verified); it
  /// becomes executable.
  void record_committed(const std::string& id);
  /// Created -> Rejected; the reserved capacity is released.
  void reject_contract(const std::string& id);
  const Contract& contract(const std::string& id) const;
  const std::map<std::string, Contract>& contracts() const { return contracts_; }

  /// Settles a committed contract. A payer already in the red leaves the
  /// contract Suspended (no transfer, no meter reading); otherwise payment
  /// completes even if it drives the payer negative.
  std::vector<Transfer> execute_contract(const std::string& id, bool meter_confirmed,
                                         std::int64_t now);

  /// Retries Suspended contracts, in commit order, whose payer is back at a
  /// non-negative balance. Returns ids that executed.
  std::vector<std::string> retry_suspended(const std::function<bool(const Contract&)>& meter,
                                           std::int64_t now);

  /// External funding (e.g. a grid top-up); the only balance change that is
  /// not a transfer between accounts.
  void deposit(const std::string& id, double amount);

  void set_credit(const std::string& id, double credit);

 private:
  Account& mutable_account(const std::string& id);

  std::map<std::string, Account> accounts_;
  std::map<std::string, std::pair<Interval, Interval>> price_boxes_;
  std::map<std::string, DailyCapacity> capacity_;
  std::map<std::string, Contract> contracts_;
  std::vector<std::string> commit_order_;
};

}  // namespace bmet
