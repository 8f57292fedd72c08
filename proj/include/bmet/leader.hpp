#pragma once

#include <vector>

#include "bmet/follower.hpp"
#include "bmet/market.hpp"

namespace bmet {

enum class Aggregator { Electricity, Heat };

/// Every community's best response to `p`, in community order.
std::vector<KktSolution> city_responses(const CityMarket& city, PricePair p);

double profit_e(const CityMarket& city, PricePair p);
double profit_h(const CityMarket& city, PricePair p);
double profit(const CityMarket& city, Aggregator who, PricePair p);

/// Analytic derivative of an aggregator's profit w.r.t. its own price,
/// assembled from per-community response derivatives. At a regime switch
/// this is the one-sided value of the regime the solver reports.
double profit_gradient(const CityMarket& city, Aggregator who, PricePair p);

/// Projects an unconstrained optimum onto [lo, hi].
double clamp_optimum(double p_hat, double lo, double hi);

/// Best own price given the other aggregator's price: bisection on the sign
/// of profit_gradient, then clamped to the price box.
double best_price(const CityMarket& city, Aggregator who, double p_other);

struct ConcavityReport {
  double worst_second_difference = 0.0;  ///< max over interior grid points
  double profit_scale = 0.0;             ///< max |V| on the grid
};

/// Scans the aggregator's profit over `n_grid` evenly spaced own prices
/// spanning its box (the other price held at `p_other`).
ConcavityReport concavity_probe(const CityMarket& city, Aggregator who, double p_other,
                                int n_grid);

}  // namespace bmet
