#include "bmet/market.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bmet {

namespace {

constexpr double kE = std::numbers::e;

std::string describe(const Interval& iv) {
  std::ostringstream os;
  os.precision(8);
  os << "(" << iv.lo << ", " << iv.hi << ")";
  return os.str();
}

}  // namespace

double ChpParams::electricity_adaption() const { return (kE - 1.0) / electricity_output(); }

double ChpParams::heat_adaption() const { return (kE - 1.0) / heat_output(); }

void ChpParams::validate() const {
  if (!(q > 0.0)) throw MarketError("chp: q must be positive");
  if (!(eta_g > 0.0 && eta_g < 1.0)) throw MarketError("chp: eta_g must lie in (0, 1)");
  if (!(eta_r > 0.0 && eta_r <= 1.0)) throw MarketError("chp: eta_r must lie in (0, 1]");
  if (!(F_m > 0.0)) throw MarketError("chp: F_m must be positive");
  if (!(c_f > 0.0)) throw MarketError("chp: c_f must be positive");
}

bool Interval::contains(double x, double rel_margin) const {
  return x > lo + rel_margin * std::abs(lo) && x < hi - rel_margin * std::abs(hi);
}

void CityMarket::validate() const {
  chp.validate();
  const double c_e = chp.electricity_cost();
  const double c_h = chp.heat_cost();
  if (!(r_e >= c_e)) throw MarketError(name + ": r_e must be >= c_e = " + std::to_string(c_e));
  if (!(r_h >= c_h)) throw MarketError(name + ": r_h must be >= c_h = " + std::to_string(c_h));
  const KIntervals k = valid_k_intervals(chp, r_e, r_h);
  if (communities.empty()) throw MarketError(name + ": at least one community is required");

  const double X = chp.electricity_output();
  const double Y = chp.heat_output();
  const Interval m_range{std::max(X, Y), X + Y};
  for (std::size_t j = 0; j < communities.size(); ++j) {
    const CommunityParams& c = communities[j];
    const std::string who = name + " community " + std::to_string(j + 1);
    if (!k.k_e.contains(c.k_e, kKIntervalMargin)) {
      std::ostringstream os;
      os.precision(8);
      os << who << ": k_e = " << c.k_e << " outside valid interval " << describe(k.k_e);
      throw MarketError(os.str());
    }
    if (!k.k_h.contains(c.k_h, kKIntervalMargin)) {
      std::ostringstream os;
      os.precision(8);
      os << who << ": k_h = " << c.k_h << " outside valid interval " << describe(k.k_h);
      throw MarketError(os.str());
    }
    if (c.M_min != 0.0 && !m_range.contains(c.M_min)) {
      std::ostringstream os;
      os.precision(8);
      os << who << ": M_min = " << c.M_min << " must be 0 or lie in " << describe(m_range);
      throw MarketError(os.str());
    }
  }
}

EnergySplit energy_split(const ChpParams& chp, Dispatch d) {
  const double X = chp.electricity_output();
  const double Y = chp.heat_output();
  return {d.alpha * X, (1.0 - d.alpha) * X, d.beta * Y, (1.0 - d.beta) * Y};
}

double des_utility(const ChpParams& chp, const CommunityParams& comm, PricePair p, Dispatch d) {
  const EnergySplit s = energy_split(chp, d);
  return comm.k_e * std::log1p(chp.electricity_adaption() * s.E_use) +
         comm.k_h * std::log1p(chp.heat_adaption() * s.Q_use) + p.p_e * s.E_exc + p.p_h * s.Q_exc -
         chp.fuel_cost();
}

AggregatorProfits aggregator_profits(const CityMarket& city, PricePair p,
                                     std::span<const Dispatch> dispatches) {
  if (dispatches.size() != city.communities.size())
    throw MarketError("aggregator_profits: one dispatch per community is required");
  double e_sold = 0.0;
  double h_sold = 0.0;
  for (const Dispatch& d : dispatches) {
    const EnergySplit s = energy_split(city.chp, d);
    e_sold += s.E_exc;
    h_sold += s.Q_exc;
  }
  return {(city.r_e - p.p_e) * e_sold, (city.r_h - p.p_h) * h_sold};
}

KIntervals valid_k_intervals(const ChpParams& chp, double r_e, double r_h) {
  const double c_e = chp.electricity_cost();
  const double c_h = chp.heat_cost();
  if (!(r_e < kE * c_e))
    throw MarketError("r_e must be below e*c_e = " + std::to_string(kE * c_e) +
                      "; no satisfaction coefficient keeps the electricity response interior");
  if (!(r_h < kE * c_h))
    throw MarketError("r_h must be below e*c_h = " + std::to_string(kE * c_h) +
                      "; no satisfaction coefficient keeps the heat response interior");
  const double X = chp.electricity_output();
  const double Y = chp.heat_output();
  return {{r_e * X / (kE - 1.0), c_e * X / (1.0 - 1.0 / kE)},
          {r_h * Y / (kE - 1.0), c_h * Y / (1.0 - 1.0 / kE)}};
}

double mixed_min_requirement(const ChpParams& chp, double w) {
  const double X = chp.electricity_output();
  const double Y = chp.heat_output();
  return w * std::max(X, Y) + (1.0 - w) * (X + Y);
}

}  // namespace bmet
