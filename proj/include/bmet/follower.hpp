#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include "bmet/market.hpp"

namespace bmet {

/// Which KKT regime produced a follower's optimal dispatch. The
/// `*Constrained` variants have the minimum-energy constraint binding.
enum class KktCase {
  Interior,
  InteriorConstrained,
  AlphaSaturated,
  AlphaSaturatedConstrained,
  BetaSaturated,
  BetaSaturatedConstrained,
};

std::string_view to_string(KktCase c);

/// Lagrange multipliers of the follower problem, all >= 0.
struct Multipliers {
  double min_energy = 0.0;  ///< on X*alpha + Y*beta >= M_min
  double alpha_cap = 0.0;   ///< on alpha <= 1
  double beta_cap = 0.0;    ///< on beta <= 1
};

struct KktSolution {
  Dispatch dispatch;
  KktCase kkt_case = KktCase::Interior;
  Multipliers multipliers;
};

/// Raised when no KKT regime certifies an optimum. Unreachable for inputs
/// that satisfy CityMarket::validate; seeing it indicates a defect.
class KktError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinates within this distance of 1 count as saturated.
inline constexpr double kSaturationTol = 1e-9;

/// Unconstrained stationary point of the DES utility. Throws std::domain_error
/// when a component leaves [0, 1] (coefficients outside their valid range).
Dispatch interior_stationary(const ChpParams& chp, const CommunityParams& comm, PricePair p);

/// Real roots (ascending) of the quadratic whose roots are candidate
/// multipliers for the binding minimum-energy constraint.
struct QuadraticCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};
QuadraticCoefficients lambda1_coefficients(const ChpParams& chp, const CommunityParams& comm,
                                           PricePair p);
std::vector<double> lambda1_roots(const ChpParams& chp, const CommunityParams& comm, PricePair p);

/// Exact optimal dispatch for the offered prices.
KktSolution best_response(const ChpParams& chp, const CommunityParams& comm, PricePair p);

/// d alpha / d p_e within the given regime (holding p_h fixed). Along the
/// binding constraint the multiplier moves with the price, which this
/// accounts for.
double response_derivative_alpha(const ChpParams& chp, const CommunityParams& comm, PricePair p,
                                 KktCase c);
/// d beta / d p_h, the heat analogue.
double response_derivative_beta(const ChpParams& chp, const CommunityParams& comm, PricePair p,
                                KktCase c);

}  // namespace bmet
