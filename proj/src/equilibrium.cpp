#include "bmet/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bmet/leader.hpp"

namespace bmet {

void NeConfig::validate() const {
  if (!(delta0 > 0.0)) throw std::invalid_argument("NeConfig: delta0 must be positive");
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("NeConfig: decay must lie in (0, 1)");
  if (max_iters < 1) throw std::invalid_argument("NeConfig: max_iters must be >= 1");
}

NeNotConverged::NeNotConverged(NeResult partial)
    : std::runtime_error("find_ne: no fixed point within " + std::to_string(partial.iterations) +
                         " iterations"),
      partial_(std::move(partial)) {}

PricePair initial_prices(const CityMarket& city, const NeConfig& cfg) {
  const Interval e = city.electricity_price_box();
  const Interval h = city.heat_price_box();
  switch (cfg.init) {
    case NeInit::LowCorner: return {e.lo, h.lo};
    case NeInit::HighCorner: return {e.hi, h.hi};
    case NeInit::Midpoint: return {0.5 * (e.lo + e.hi), 0.5 * (h.lo + h.hi)};
    case NeInit::Explicit:
      return {std::clamp(cfg.explicit_start.p_e, e.lo, e.hi),
              std::clamp(cfg.explicit_start.p_h, h.lo, h.hi)};
  }
  return {e.lo, h.lo};
}

namespace {

// One aggregator's comparison of p, p+step and p-step. `value` evaluates its
// profit at an own price. Returns the new price.
template <typename Value>
double local_move(double current, double step, Interval box, Value&& value) {
  const double up = std::min(box.hi, current + step);
  const double down = std::max(box.lo, current - step);
  const double v_stay = value(current);
  const double v_up = value(up);
  const double v_down = value(down);
  if (v_up >= v_stay && v_up >= v_down) return up;
  if (v_down >= v_stay && v_down >= v_up) return down;
  return current;
}

}  // namespace

NeResult find_ne(const CityMarket& city, const NeConfig& cfg) {
  cfg.validate();
  const Interval e_box = city.electricity_price_box();
  const Interval h_box = city.heat_price_box();

  NeResult result;
  PricePair p = initial_prices(city, cfg);
  for (std::int64_t it = 1; it <= cfg.max_iters; ++it) {
    const double step = cfg.delta0 * std::pow(cfg.decay, static_cast<double>(it - 1));
    const PricePair before = p;

    const double ve_before = profit_e(city, p);
    p.p_e = local_move(p.p_e, step, e_box, [&](double x) { return profit_e(city, {x, p.p_h}); });
    const double ve_after_move = profit_e(city, p);

    const double vh_before = profit_h(city, p);
    p.p_h = local_move(p.p_h, step, h_box, [&](double x) { return profit_h(city, {p.p_e, x}); });
    const double vh_after = profit_h(city, p);

    result.prices = p;
    result.iterations = it;
    result.final_step = step;
    if (cfg.record_trace) {
      result.trace.push_back({it, p.p_e, p.p_h, profit_e(city, p), vh_after, step,
                              ve_after_move - ve_before, vh_after - vh_before});
    }
    if (p == before) return result;
  }
  throw NeNotConverged(std::move(result));
}

StackelbergOutcome stackelberg_outcome(const CityMarket& city, PricePair p) {
  StackelbergOutcome out;
  out.prices = p;
  out.responses = city_responses(city, p);
  std::vector<Dispatch> dispatches;
  dispatches.reserve(out.responses.size());
  for (std::size_t j = 0; j < out.responses.size(); ++j) {
    dispatches.push_back(out.responses[j].dispatch);
    out.utilities.push_back(des_utility(city.chp, city.communities[j], p, out.responses[j].dispatch));
  }
  const AggregatorProfits v = aggregator_profits(city, p, dispatches);
  out.v_e = v.electricity;
  out.v_h = v.heat;
  return out;
}

}  // namespace bmet
