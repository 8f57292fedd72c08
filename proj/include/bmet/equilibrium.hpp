#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bmet/follower.hpp"
#include "bmet/market.hpp"

namespace bmet {

enum class NeInit { LowCorner, HighCorner, Midpoint, Explicit };

struct NeConfig {
  double delta0 = 1e-10;  ///< initial step, coin/J
  double decay = 0.999;   ///< step attenuation per iteration, in (0, 1)
  NeInit init = NeInit::LowCorner;
  PricePair explicit_start{};  ///< used when init == Explicit
  std::int64_t max_iters = 100000;
  bool record_trace = true;

  void validate() const;
};

struct NeStep {
  std::int64_t iteration = 0;  ///< 1-based
  double p_e = 0.0;            ///< prices after this iteration
  double p_h = 0.0;
  double v_e = 0.0;  ///< profits at those prices
  double v_h = 0.0;
  double step = 0.0;     ///< step used in this iteration: delta0 * decay^(iteration-1)
  double gain_e = 0.0;   ///< change of V_e caused by EA's own move
  double gain_h = 0.0;   ///< change of V_h caused by HA's own move
};

using NeTrace = std::vector<NeStep>;

struct NeResult {
  PricePair prices;
  std::int64_t iterations = 0;  ///< iteration on which the fixed point was detected
  double final_step = 0.0;      ///< step used on that iteration
  NeTrace trace;
};

/// Raised when max_iters elapse without reaching the fixed point; carries the
/// partial result and trace.
class NeNotConverged : public std::runtime_error {
 public:
  explicit NeNotConverged(NeResult partial);
  const NeResult& partial() const { return partial_; }

 private:
  NeResult partial_;
};

PricePair initial_prices(const CityMarket& city, const NeConfig& cfg);

/// Decentralised price search between the electricity and heat aggregators.
/// Each iteration EA then HA compares its profit at p, p+step and p-step
/// (candidates clamped to its box) and moves to the best, preferring +step,
/// then -step, on ties. Stops once an iteration leaves both prices unchanged.
NeResult find_ne(const CityMarket& city, const NeConfig& cfg);

struct StackelbergOutcome {
  PricePair prices;
  std::vector<KktSolution> responses;
  std::vector<double> utilities;
  double v_e = 0.0;
  double v_h = 0.0;
};

StackelbergOutcome stackelberg_outcome(const CityMarket& city, PricePair p);

}  // namespace bmet
