#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmet {

/// Raised when market parameters violate a structural invariant.
class MarketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical and cost constants of one CHP plant. All plants in a city share
/// these values; a plant always runs at full gas capacity `F_m`.
struct ChpParams {
  double q = 0.0;      ///< calorific value of natural gas, J/m^3
  double eta_g = 0.0;  ///< fraction of fuel energy converted to electricity
  double eta_r = 0.0;  ///< heat-recovery efficiency
  double F_m = 0.0;    ///< maximum gas consumption, m^3/day
  double c_f = 0.0;    ///< gas unit cost, coin/m^3

  /// Daily electricity output at full capacity (J/day).
  double electricity_output() const { return eta_g * q * F_m; }
  /// Daily recoverable heat output at full capacity (J/day).
  double heat_output() const { return (1.0 - eta_g) * eta_r * q * F_m; }

  double electricity_cost() const { return c_f / q; }
  double heat_cost() const { return c_f / (q * eta_r); }

  /// Adaption coefficients chosen so that ln(1 + b * output) == 1.
  double electricity_adaption() const;
  double heat_adaption() const;

  /// Daily fuel bill, coin/day.
  double fuel_cost() const { return c_f * F_m; }

  void validate() const;
};

/// Open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  /// True when x lies strictly inside, keeping `rel_margin * |bound|` away
  /// from each end.
  bool contains(double x, double rel_margin = 0.0) const;
};

struct CommunityParams {
  double k_e = 0.0;    ///< electricity satisfaction coefficient
  double k_h = 0.0;    ///< heat satisfaction coefficient
  double M_min = 0.0;  ///< minimum retained energy, J/day (0 = inactive)
};

/// One city's retail market: two aggregators buying from every community.
struct CityMarket {
  std::string name = "S1";
  double r_e = 0.0;  ///< electricity retail price, coin/J
  double r_h = 0.0;  ///< heat retail price, coin/J
  ChpParams chp;
  std::vector<CommunityParams> communities;

  Interval electricity_price_box() const { return {chp.electricity_cost(), r_e}; }
  Interval heat_price_box() const { return {chp.heat_cost(), r_h}; }

  /// Checks every market, community and price-box invariant; throws
  /// MarketError with a message naming the violated bound.
  void validate() const;
};

/// Follower strategy: fractions of generated electricity/heat kept locally.
struct Dispatch {
  double alpha = 0.0;
  double beta = 0.0;

  friend bool operator==(const Dispatch&, const Dispatch&) = default;
};

/// Leader strategy: unit purchase prices in coin/J.
struct PricePair {
  double p_e = 0.0;
  double p_h = 0.0;

  friend bool operator==(const PricePair&, const PricePair&) = default;
};

struct EnergySplit {
  double E_use = 0.0;
  double E_exc = 0.0;
  double Q_use = 0.0;
  double Q_exc = 0.0;
};

struct AggregatorProfits {
  double electricity = 0.0;  ///< V_e, coin/day
  double heat = 0.0;         ///< V_h, coin/day
};

struct KIntervals {
  Interval k_e;
  Interval k_h;
};

/// Relative margin kept from the satisfaction-coefficient bounds.
inline constexpr double kKIntervalMargin = 1e-9;

EnergySplit energy_split(const ChpParams& chp, Dispatch d);

/// DES utility in coin/day at full production.
double des_utility(const ChpParams& chp, const CommunityParams& comm, PricePair p, Dispatch d);

AggregatorProfits aggregator_profits(const CityMarket& city, PricePair p,
                                     std::span<const Dispatch> dispatches);

/// Satisfaction-coefficient ranges that keep the unconstrained optimum
/// strictly inside (0,1) for every in-box price. Throws MarketError when
/// r_e >= e*c_e (or the heat analogue), where no such coefficient exists.
KIntervals valid_k_intervals(const ChpParams& chp, double r_e, double r_h);

/// Minimum requirement expressed as a mix of the two reference levels:
/// w * max(X, Y) + (1 - w) * (X + Y).
double mixed_min_requirement(const ChpParams& chp, double w);

}  // namespace bmet
