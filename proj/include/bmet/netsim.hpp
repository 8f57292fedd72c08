#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "bmet/chain.hpp"
#include "bmet/crypto.hpp"

namespace bmet {

enum class Behavior { Honest, SilentLeader, InvalidBlockLeader, Dissenter, Equivocator };

std::string_view to_string(Behavior b);
std::optional<Behavior> parse_behavior(std::string_view s);

/// Uniform integer delay in [min, max] logical ticks.
struct DelayModel {
  std::int64_t min = 1;
  std::int64_t max = 1;
};

struct FaultProfile {
  std::vector<Behavior> behaviors;  ///< indexed by node
  double drop_probability = 0.0;
  DelayModel delay;

  void validate() const;
  std::size_t faulty_count() const;
  /// count(non-Honest) <= floor((n-1)/3).
  bool within_fault_bound() const;
  static FaultProfile all_honest(std::size_t n);
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double unit_draw(std::mt19937_64& rng);

enum class MsgKind { PrePrepare, Prepare, Commit };

std::string_view to_string(MsgKind k);

struct Message {
  MsgKind kind = MsgKind::Prepare;
  std::uint64_t round = 0;
  std::size_t sender = 0;
  Hash256 block_hash{};
  Hash256 leader_sig{};  ///< leader's signature over block_hash, carried as evidence
  Hash256 signature{};   ///< sender's signature over signing_message()
  std::shared_ptr<const Block> block;  ///< PrePrepare only

  std::string signing_message() const;
};

struct Delivery {
  std::int64_t time = 0;
  std::uint64_t seq = 0;
  std::size_t to = 0;
  Message msg;
};

/// Pending deliveries ordered by (time, sequence number).
class EventQueue {
 public:
  void push(std::int64_t time, std::size_t to, Message msg);
  /// Pops the earliest delivery if it is due by `until`.
  std::optional<Delivery> pop(std::int64_t until);
  /// Pops every delivery due by `until`, in order.
  std::vector<Delivery> deliver(std::int64_t until);
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  void clear();

 private:
  struct Later {
    bool operator()(const Delivery& a, const Delivery& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Delivery, std::vector<Delivery>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// Lossy point-to-point links with random delays over one event queue.
class Network {
 public:
  Network(std::size_t n_nodes, double drop_probability, DelayModel delay, std::uint64_t seed);

  void send(std::size_t to, Message msg, std::int64_t now);
  /// Sends to every node except the sender.
  void broadcast(const Message& msg, std::int64_t now);

  std::optional<Delivery> pop(std::int64_t until) { return queue_.pop(until); }
  void clear() { queue_.clear(); }
  std::size_t size() const { return n_; }

  std::uint64_t sent() const { return sent_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  std::size_t n_;
  double drop_;
  DelayModel delay_;
  std::mt19937_64 rng_;
  EventQueue queue_;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace bmet
