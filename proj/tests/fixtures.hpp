#pragma once

#include <random>
#include <utility>
#include <vector>

#include "bmet/market.hpp"
#include "oracles.hpp"

namespace fixture {

/// The reference city with the given (k_e, k_h) pairs and minimum-energy
/// mix weight (negative = no requirement).
inline bmet::CityMarket city(const std::vector<std::pair<double, double>>& ks, double mix = -1.0) {
  bmet::CityMarket m;
  m.name = "S";
  m.r_e = oracle::kRefRe;
  m.r_h = oracle::kRefRh;
  m.chp = oracle::reference_chp();
  for (auto [ke, kh] : ks)
    m.communities.push_back({ke, kh, mix < 0.0 ? 0.0 : bmet::mixed_min_requirement(m.chp, mix)});
  return m;
}

inline bmet::CityMarket five_communities(double mix) {
  return city({{115.24, 137.81}, {129.14, 137.81}, {143.04, 137.81}, {156.94, 137.81}, {170.85, 137.81}},
              mix);
}

/// A coefficient pair drawn uniformly from inside the valid intervals.
inline std::pair<double, double> random_k(std::mt19937_64& rng) {
  const auto k = bmet::valid_k_intervals(oracle::reference_chp(), oracle::kRefRe, oracle::kRefRh);
  auto inside = [&](bmet::Interval i) {
    const double pad = 1e-6 * (i.hi - i.lo);
    return oracle::uniform(rng, i.lo + pad, i.hi - pad);
  };
  return {inside(k.k_e), inside(k.k_h)};
}

inline bmet::PricePair random_prices(std::mt19937_64& rng) {
  const auto chp = oracle::reference_chp();
  return {oracle::uniform(rng, chp.electricity_cost(), oracle::kRefRe),
          oracle::uniform(rng, chp.heat_cost(), oracle::kRefRh)};
}

}  // namespace fixture
