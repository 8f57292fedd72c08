#include "bmet/leader.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmet {

namespace {

PricePair with_own_price(Aggregator who, double own, double other) {
  return who == Aggregator::Electricity ? PricePair{own, other} : PricePair{other, own};
}

Interval own_box(const CityMarket& city, Aggregator who) {
  return who == Aggregator::Electricity ? city.electricity_price_box() : city.heat_price_box();
}

}  // namespace

std::vector<KktSolution> city_responses(const CityMarket& city, PricePair p) {
  std::vector<KktSolution> out;
  out.reserve(city.communities.size());
  for (const CommunityParams& c : city.communities) out.push_back(best_response(city.chp, c, p));
  return out;
}

double profit_e(const CityMarket& city, PricePair p) {
  const double X = city.chp.electricity_output();
  double sold = 0.0;
  for (const CommunityParams& c : city.communities)
    sold += (1.0 - best_response(city.chp, c, p).dispatch.alpha) * X;
  return (city.r_e - p.p_e) * sold;
}

double profit_h(const CityMarket& city, PricePair p) {
  const double Y = city.chp.heat_output();
  double sold = 0.0;
  for (const CommunityParams& c : city.communities)
    sold += (1.0 - best_response(city.chp, c, p).dispatch.beta) * Y;
  return (city.r_h - p.p_h) * sold;
}

double profit(const CityMarket& city, Aggregator who, PricePair p) {
  return who == Aggregator::Electricity ? profit_e(city, p) : profit_h(city, p);
}

double profit_gradient(const CityMarket& city, Aggregator who, PricePair p) {
  double sum = 0.0;
  for (const CommunityParams& c : city.communities) {
    const KktSolution s = best_response(city.chp, c, p);
    if (who == Aggregator::Electricity) {
      const double d = response_derivative_alpha(city.chp, c, p, s.kkt_case);
      sum += city.chp.electricity_output() * ((1.0 - s.dispatch.alpha) + (city.r_e - p.p_e) * d);
    } else {
      const double d = response_derivative_beta(city.chp, c, p, s.kkt_case);
      sum += city.chp.heat_output() * ((1.0 - s.dispatch.beta) + (city.r_h - p.p_h) * d);
    }
  }
  return -sum;
}

double clamp_optimum(double p_hat, double lo, double hi) {
  if (p_hat >= hi) return hi;
  if (p_hat <= lo) return lo;
  return p_hat;
}

double best_price(const CityMarket& city, Aggregator who, double p_other) {
  const Interval box = own_box(city, who);
  auto slope = [&](double x) { return profit_gradient(city, who, with_own_price(who, x, p_other)); };
  if (slope(box.hi) >= 0.0) return box.hi;
  if (slope(box.lo) < 0.0) return box.lo;
  double lo = box.lo;
  double hi = box.hi;
  // Flat zero-profit stretches report a zero slope and are walked through.
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (slope(mid) >= 0.0 ? lo : hi) = mid;
  }
  return clamp_optimum(0.5 * (lo + hi), box.lo, box.hi);
}

ConcavityReport concavity_probe(const CityMarket& city, Aggregator who, double p_other,
                                int n_grid) {
  if (n_grid < 3) throw std::invalid_argument("concavity_probe: n_grid must be >= 3");
  const Interval box = own_box(city, who);
  std::vector<double> v(static_cast<std::size_t>(n_grid));
  for (int i = 0; i < n_grid; ++i) {
    const double x = box.lo + (box.hi - box.lo) * i / (n_grid - 1);
    v[static_cast<std::size_t>(i)] = profit(city, who, with_own_price(who, x, p_other));
  }
  ConcavityReport r;
  r.worst_second_difference = -std::numeric_limits<double>::infinity();
  for (double x : v) r.profit_scale = std::max(r.profit_scale, std::abs(x));
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    r.worst_second_difference = std::max(r.worst_second_difference, v[i - 1] - 2.0 * v[i] + v[i + 1]);
  return r;
}

}  // namespace bmet
