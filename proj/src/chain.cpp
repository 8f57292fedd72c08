#include "bmet/chain.hpp"

#include <sstream>

namespace bmet {

Hash256 Block::hash() const {
  std::ostringstream os;
  os << "block|" << height << '|' << to_hex(prev_hash) << '|' << to_hex(merkle_root) << '|'
     << leader << '|' << round << '|' << txs.size();
  return sha256(os.str());
}

Hash256 merkle_root(const std::vector<Contract>& txs) {
  if (txs.empty()) return sha256("merkle|empty");
  std::vector<Hash256> level;
  level.reserve(txs.size());
  for (const Contract& c : txs) level.push_back(sha256("leaf|" + c.full_payload()));
  while (level.size() > 1) {
    if (level.size() % 2) level.push_back(level.back());
    std::vector<Hash256> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2)
      next.push_back(sha256("node|" + to_hex(level[i]) + to_hex(level[i + 1])));
    level = std::move(next);
  }
  return level.front();
}

Chain::Chain() {
  Block g;
  g.leader = "genesis:" + std::string(kHashAlgorithm);
  g.merkle_root = merkle_root({});
  blocks_.push_back(g);
}

void Chain::append(const Block& b) {
  if (b.height != height() + 1)
    throw ChainError("append: height " + std::to_string(b.height) + " after " +
                     std::to_string(height()));
  if (b.prev_hash != tip_hash()) throw ChainError("append: prev_hash does not match tip");
  if (b.merkle_root != merkle_root(b.txs)) throw ChainError("append: bad merkle root");
  std::set<std::string> seen;
  for (const Contract& c : b.txs)
    if (tx_ids_.count(c.id) || !seen.insert(c.id).second)
      throw ChainError("append: contract " + c.id + " already on chain");
  blocks_.push_back(b);
  tx_ids_.insert(seen.begin(), seen.end());
}

bool Chain::audit() const {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.height != i || b.merkle_root != merkle_root(b.txs)) return false;
    if (i > 0 && b.prev_hash != blocks_[i - 1].hash()) return false;
    for (const Contract& c : b.txs)
      if (!ids.insert(c.id).second) return false;
  }
  return true;
}

std::string Chain::export_text(std::uint64_t seed) const {
  std::ostringstream os;
  os << "# hash=" << kHashAlgorithm << " seed=" << seed << '\n';
  for (const Block& b : blocks_) {
    os << b.height << ' ' << to_hex(b.prev_hash) << ' ' << to_hex(b.merkle_root) << ' '
       << b.leader << ' ' << b.round << ' ' << b.txs.size();
    for (const Contract& c : b.txs) os << ' ' << c.id;
    os << '\n';
  }
  return os.str();
}

bool TxPool::add(const Contract& c) {
  if (by_id_.count(c.id)) return false;
  by_id_.emplace(c.id, c);
  order_.push_back(c.id);
  return true;
}

bool TxPool::matches(const Contract& c) const {
  auto it = by_id_.find(c.id);
  return it != by_id_.end() && it->second.full_payload() == c.full_payload();
}

void TxPool::remove(const std::vector<Contract>& committed) {
  for (const Contract& c : committed) by_id_.erase(c.id);
  std::erase_if(order_, [&](const std::string& id) { return !by_id_.count(id); });
}

std::vector<Contract> TxPool::select(std::size_t max_txs) const {
  std::vector<Contract> out;
  for (const std::string& id : order_) {
    if (out.size() >= max_txs) break;
    out.push_back(by_id_.at(id));
  }
  return out;
}

std::string_view to_string(BlockReject r) {
  switch (r) {
    case BlockReject::BadLeaderSig: return "BadLeaderSig";
    case BlockReject::BadPrevHash: return "BadPrevHash";
    case BlockReject::BadMerkle: return "BadMerkle";
    case BlockReject::UnknownTx: return "UnknownTx";
  }
  return "?";
}

std::optional<BlockReject> validate_block(const Block& b, const std::string& expected_leader,
                                          const TxPool& pool, const Chain& chain,
                                          const KeyRegistry& keys) {
  if (b.leader != expected_leader || !keys.verify(b.leader, b.signing_message(), b.leader_sig))
    return BlockReject::BadLeaderSig;
  if (b.height != chain.height() + 1 || b.prev_hash != chain.tip_hash())
    return BlockReject::BadPrevHash;
  if (b.merkle_root != merkle_root(b.txs)) return BlockReject::BadMerkle;
  std::set<std::string> seen;
  for (const Contract& c : b.txs)
    if (!pool.matches(c) || chain.contains_tx(c.id) || !seen.insert(c.id).second)
      return BlockReject::UnknownTx;
  return std::nullopt;
}

}  // namespace bmet
