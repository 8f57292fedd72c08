#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bmet/crypto.hpp"
#include "bmet/ledger.hpp"

namespace bmet {

struct Block {
  std::uint64_t height = 0;
  Hash256 prev_hash{};
  Hash256 merkle_root{};
  std::string leader;
  std::uint64_t round = 0;
  std::vector<Contract> txs;
  Hash256 leader_sig{};

  /// Digest of the header fields (not the signature).
  Hash256 hash() const;
  /// Message the leader signs: hex of hash().
  std::string signing_message() const { return to_hex(hash()); }
};

/// Leaves are digests of each contract's full payload; odd levels repeat
/// their last node. The empty list has a fixed root.
Hash256 merkle_root(const std::vector<Contract>& txs);

class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only hash-linked block list starting at a genesis block.
class Chain {
 public:
  Chain();

  const Block& tip() const { return blocks_.back(); }
  Hash256 tip_hash() const { return blocks_.back().hash(); }
  std::uint64_t height() const { return blocks_.back().height; }
  const std::vector<Block>& blocks() const { return blocks_; }
  bool contains_tx(const std::string& id) const { return tx_ids_.count(id) != 0; }

  /// Appends after checking linkage, height, merkle root and that no
  /// contract id repeats. Throws ChainError otherwise.
  void append(const Block& b);

  /// Recomputes every link and merkle root from genesis.
  bool audit() const;

  /// One line per block: height prev merkle leader round tx_count tx_ids...
  /// preceded by a comment line naming the hash and seed.
  std::string export_text(std::uint64_t seed) const;

 private:
  std::vector<Block> blocks_;
  std::set<std::string> tx_ids_;
};

/// Local transaction pool: verified, not yet committed contracts in arrival
/// order.
class TxPool {
 public:
  /// Adds a contract unless its id is already pooled. Returns true if added.
  bool add(const Contract& c);
  bool contains(const std::string& id) const { return by_id_.count(id) != 0; }
  /// True if the pool holds a byte-identical copy.
  bool matches(const Contract& c) const;
  void remove(const std::vector<Contract>& committed);
  std::vector<Contract> select(std::size_t max_txs) const;
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<std::string> order_;
  std::map<std::string, Contract> by_id_;
};

enum class BlockReject { BadLeaderSig, BadPrevHash, BadMerkle, UnknownTx };

std::string_view to_string(BlockReject r);

/// Checks a proposed block against the local chain tip and pool.
std::optional<BlockReject> validate_block(const Block& b, const std::string& expected_leader,
                                          const TxPool& pool, const Chain& chain,
                                          const KeyRegistry& keys);

}  // namespace bmet
