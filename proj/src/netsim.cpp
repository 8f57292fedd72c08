#include "bmet/netsim.hpp"

#include <algorithm>
#include <stdexcept>

namespace bmet {

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::Honest: return "Honest";
    case Behavior::SilentLeader: return "SilentLeader";
    case Behavior::InvalidBlockLeader: return "InvalidBlockLeader";
    case Behavior::Dissenter: return "Dissenter";
    case Behavior::Equivocator: return "Equivocator";
  }
  return "?";
}

std::optional<Behavior> parse_behavior(std::string_view s) {
  for (Behavior b : {Behavior::Honest, Behavior::SilentLeader, Behavior::InvalidBlockLeader,
                     Behavior::Dissenter, Behavior::Equivocator})
    if (to_string(b) == s) return b;
  return std::nullopt;
}

void FaultProfile::validate() const {
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0))
    throw std::invalid_argument("drop_probability must lie in [0, 1]");
  if (delay.min < 0 || delay.max < delay.min)
    throw std::invalid_argument("delay bounds must satisfy 0 <= min <= max");
}

std::size_t FaultProfile::faulty_count() const {
  return static_cast<std::size_t>(
      std::count_if(behaviors.begin(), behaviors.end(), [](Behavior b) { return b != Behavior::Honest; }));
}

bool FaultProfile::within_fault_bound() const {
  return !behaviors.empty() && faulty_count() <= (behaviors.size() - 1) / 3;
}

FaultProfile FaultProfile::all_honest(std::size_t n) {
  FaultProfile p;
  p.behaviors.assign(n, Behavior::Honest);
  return p;
}

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string_view to_string(MsgKind k) {
  switch (k) {
    case MsgKind::PrePrepare: return "pre-prepare";
    case MsgKind::Prepare: return "prepare";
    case MsgKind::Commit: return "commit";
  }
  return "?";
}

std::string Message::signing_message() const {
  return std::string(to_string(kind)) + "|" + std::to_string(round) + "|" +
         std::to_string(sender) + "|" + to_hex(block_hash);
}

void EventQueue::push(std::int64_t time, std::size_t to, Message msg) {
  heap_.push({time, next_seq_++, to, std::move(msg)});
}

std::optional<Delivery> EventQueue::pop(std::int64_t until) {
  if (heap_.empty() || heap_.top().time > until) return std::nullopt;
  Delivery d = heap_.top();
  heap_.pop();
  return d;
}

std::vector<Delivery> EventQueue::deliver(std::int64_t until) {
  std::vector<Delivery> out;
  while (auto d = pop(until)) out.push_back(std::move(*d));
  return out;
}

void EventQueue::clear() {
  heap_ = {};
}

Network::Network(std::size_t n_nodes, double drop_probability, DelayModel delay, std::uint64_t seed)
    : n_(n_nodes), drop_(drop_probability), delay_(delay), rng_(seed) {}

void Network::send(std::size_t to, Message msg, std::int64_t now) {
  ++sent_;
  // Both draws happen for every message so the stream does not depend on
  // which messages get dropped.
  const bool drop = unit_draw(rng_) < drop_;
  const auto span = static_cast<std::uint64_t>(delay_.max - delay_.min) + 1;
  const std::int64_t d = delay_.min + static_cast<std::int64_t>(rng_() % span);
  if (drop) {
    ++dropped_;
    return;
  }
  queue_.push(now + d, to, std::move(msg));
}

void Network::broadcast(const Message& msg, std::int64_t now) {
  for (std::size_t to = 0; to < n_; ++to)
    if (to != msg.sender) send(to, msg, now);
}

}  // namespace bmet
