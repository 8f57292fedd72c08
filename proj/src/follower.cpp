#include "bmet/follower.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace bmet {

namespace {

struct Model {
  double X, Y, b_e, b_h, k_e, k_h, M, p_e, p_h;

  Model(const ChpParams& chp, const CommunityParams& comm, PricePair p)
      : X(chp.electricity_output()),
        Y(chp.heat_output()),
        b_e(chp.electricity_adaption()),
        b_h(chp.heat_adaption()),
        k_e(comm.k_e),
        k_h(comm.k_h),
        M(comm.M_min),
        p_e(p.p_e),
        p_h(p.p_h) {}

  // Response with the coupling multiplier folded into the effective price.
  double alpha_at(double lambda) const { return (k_e / (p_e - lambda) - 1.0 / b_e) / X; }
  double beta_at(double lambda) const { return (k_h / (p_h - lambda) - 1.0 / b_h) / Y; }

  double grad_alpha(double alpha) const { return X * (k_e * b_e / (1.0 + b_e * X * alpha) - p_e); }
  double grad_beta(double beta) const { return Y * (k_h * b_h / (1.0 + b_h * Y * beta) - p_h); }

  // Slack tolerances, scaled to the units of each quantity.
  double energy_slack() const { return 1e-12 * (X + Y); }
  double price_slack() const { return 1e-12 * std::max(p_e, p_h); }
  double alpha_grad_slack() const { return 1e-9 * X * p_e; }
  double beta_grad_slack() const { return 1e-9 * Y * p_h; }

  bool feasible_energy(double a, double b) const { return X * a + Y * b >= M - energy_slack(); }

  // The binding-constraint multiplier in (0, min price), if any.
  std::optional<double> coupling_root() const {
    const double A = M + 1.0 / b_e + 1.0 / b_h;
    const double B = k_e + k_h - A * (p_e + p_h);
    const double C = A * p_e * p_h - k_e * p_h - k_h * p_e;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    const double q = -0.5 * (B + std::copysign(s, B));
    double roots[2] = {q / A, q != 0.0 ? C / q : q / A};
    std::sort(std::begin(roots), std::end(roots));
    const double cap = std::min(p_e, p_h);
    for (double r : roots)
      if (r > 0.0 && r < cap) return r;
    return std::nullopt;
  }
};

bool below_saturation(double v) { return v < 1.0 - kSaturationTol; }

}  // namespace

std::string_view to_string(KktCase c) {
  switch (c) {
    case KktCase::Interior: return "Interior";
    case KktCase::InteriorConstrained: return "InteriorConstrained";
    case KktCase::AlphaSaturated: return "AlphaSaturated";
    case KktCase::AlphaSaturatedConstrained: return "AlphaSaturatedConstrained";
    case KktCase::BetaSaturated: return "BetaSaturated";
    case KktCase::BetaSaturatedConstrained: return "BetaSaturatedConstrained";
  }
  return "?";
}

Dispatch interior_stationary(const ChpParams& chp, const CommunityParams& comm, PricePair p) {
  const Model m(chp, comm, p);
  const Dispatch d{m.alpha_at(0.0), m.beta_at(0.0)};
  if (d.alpha < 0.0 || d.alpha > 1.0 || d.beta < 0.0 || d.beta > 1.0)
    throw std::domain_error("interior_stationary: stationary point outside [0,1]^2; "
                            "satisfaction coefficients are out of range");
  return d;
}

QuadraticCoefficients lambda1_coefficients(const ChpParams& chp, const CommunityParams& comm,
                                           PricePair p) {
  const Model m(chp, comm, p);
  const double A = m.M + 1.0 / m.b_e + 1.0 / m.b_h;
  return {A, m.k_e + m.k_h - A * (m.p_e + m.p_h), A * m.p_e * m.p_h - m.k_e * m.p_h - m.k_h * m.p_e};
}

std::vector<double> lambda1_roots(const ChpParams& chp, const CommunityParams& comm, PricePair p) {
  const auto [A, B, C] = lambda1_coefficients(chp, comm, p);
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-B / (2.0 * A)};
  // Cancellation-free form.
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  std::vector<double> roots{q / A, C / q};
  std::sort(roots.begin(), roots.end());
  return roots;
}

KktSolution best_response(const ChpParams& chp, const CommunityParams& comm, PricePair p) {
  const Model m(chp, comm, p);

  // Case 1: neither coordinate saturated.
  const double a0 = m.alpha_at(0.0);
  const double b0 = m.beta_at(0.0);
  if (m.M == 0.0) return {interior_stationary(chp, comm, p), KktCase::Interior, {}};
  if (below_saturation(a0) && below_saturation(b0) && m.feasible_energy(a0, b0))
    return {{a0, b0}, KktCase::Interior, {}};
  if (auto lambda = m.coupling_root()) {
    const double a = m.alpha_at(*lambda);
    const double b = m.beta_at(*lambda);
    if (a >= 0.0 && b >= 0.0 && below_saturation(a) && below_saturation(b))
      return {{a, b}, KktCase::InteriorConstrained, {*lambda, 0.0, 0.0}};
  }

  // Case 2: alpha = 1.
  if (below_saturation(b0) && m.feasible_energy(1.0, b0)) {
    const double cap = m.grad_alpha(1.0);
    if (cap >= -m.alpha_grad_slack())
      return {{1.0, b0}, KktCase::AlphaSaturated, {0.0, std::max(cap, 0.0), 0.0}};
  }
  {
    const double lambda = m.p_h - m.k_h * m.b_h / (m.b_h * (m.M - m.X) + 1.0);
    const double cap = m.grad_alpha(1.0) + lambda * m.X;
    const double b = (m.M - m.X) / m.Y;
    if (lambda > -m.price_slack() && cap >= -m.alpha_grad_slack() && b >= 0.0 && below_saturation(b))
      return {{1.0, b},
              KktCase::AlphaSaturatedConstrained,
              {std::max(lambda, 0.0), std::max(cap, 0.0), 0.0}};
  }

  // Case 3: beta = 1.
  if (below_saturation(a0) && m.feasible_energy(a0, 1.0)) {
    const double cap = m.grad_beta(1.0);
    if (cap >= -m.beta_grad_slack())
      return {{a0, 1.0}, KktCase::BetaSaturated, {0.0, 0.0, std::max(cap, 0.0)}};
  }
  {
    const double lambda = m.p_e - m.k_e * m.b_e / (m.b_e * (m.M - m.Y) + 1.0);
    const double cap = m.grad_beta(1.0) + lambda * m.Y;
    const double a = (m.M - m.Y) / m.X;
    if (lambda > -m.price_slack() && cap >= -m.beta_grad_slack() && a >= 0.0 && below_saturation(a))
      return {{a, 1.0},
              KktCase::BetaSaturatedConstrained,
              {std::max(lambda, 0.0), 0.0, std::max(cap, 0.0)}};
  }

  throw KktError("best_response: no KKT regime certifies an optimum");
}

namespace {

// Shared by both derivative directions: `own` is the coordinate whose price
// moves, `other` the one held fixed.
struct Side {
  double cap;    // X or Y
  double k;      // own satisfaction coefficient
  double price;  // own price
  double k_other;
  double price_other;
};

double constrained_derivative(const Side& s, double lambda) {
  const double own = s.k / ((s.price - lambda) * (s.price - lambda));
  const double other = s.k_other / ((s.price_other - lambda) * (s.price_other - lambda));
  return -own * other / ((own + other) * s.cap);
}

}  // namespace

double response_derivative_alpha(const ChpParams& chp, const CommunityParams& comm, PricePair p,
                                 KktCase c) {
  const Model m(chp, comm, p);
  switch (c) {
    case KktCase::Interior:
    case KktCase::BetaSaturated:
      return -m.k_e / (m.X * m.p_e * m.p_e);
    case KktCase::InteriorConstrained: {
      const auto lambda = m.coupling_root();
      if (!lambda) throw KktError("response_derivative_alpha: constraint is not binding here");
      return constrained_derivative({m.X, m.k_e, m.p_e, m.k_h, m.p_h}, *lambda);
    }
    case KktCase::AlphaSaturated:
    case KktCase::AlphaSaturatedConstrained:
    case KktCase::BetaSaturatedConstrained:
      return 0.0;
  }
  return 0.0;
}

double response_derivative_beta(const ChpParams& chp, const CommunityParams& comm, PricePair p,
                                KktCase c) {
  const Model m(chp, comm, p);
  switch (c) {
    case KktCase::Interior:
    case KktCase::AlphaSaturated:
      return -m.k_h / (m.Y * m.p_h * m.p_h);
    case KktCase::InteriorConstrained: {
      const auto lambda = m.coupling_root();
      if (!lambda) throw KktError("response_derivative_beta: constraint is not binding here");
      return constrained_derivative({m.Y, m.k_h, m.p_h, m.k_e, m.p_e}, *lambda);
    }
    case KktCase::BetaSaturated:
    case KktCase::BetaSaturatedConstrained:
    case KktCase::AlphaSaturatedConstrained:
      return 0.0;
  }
  return 0.0;
}

}  // namespace bmet
