#include "mcgpc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcgpc/errors.hpp"

namespace mcgpc {

double UncertainScalar::min_over(double lo, double hi) const {
  return std::min((*this)(lo), (*this)(hi));
}

double UncertainScalar::max_over(double lo, double hi) const {
  return std::max((*this)(lo), (*this)(hi));
}

std::string UncertainScalar::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << c0_;
  if (c1_ > 0.0) os << " + " << c1_ << "*theta";
  if (c1_ < 0.0) os << " - " << -c1_ << "*theta";
  return os.str();
}

void CuckerSmaleParams::validate(const ModalQuadrature& quad) const {
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    const double theta = quad.theta1(q);
    if (!(K(theta) > 0.0)) {
      throw ConfigError("alignment strength K must be positive on the support; K(" +
                        std::to_string(theta) + ") = " + std::to_string(K(theta)));
    }
    if (!(gamma(theta) >= 0.0)) {
      throw ConfigError("alignment exponent gamma must be non-negative; gamma(" +
                        std::to_string(theta) + ") = " + std::to_string(gamma(theta)));
    }
  }
}

void MorseSwarmParams::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw ConfigError("self-propulsion a and friction b must be >= 0");
  if (!(ell_A > 0.0) || !(ell_R > 0.0)) throw ConfigError("Morse lengths ell_A, ell_R must be > 0");
}

double cs_kernel(const CuckerSmaleParams& params, double theta, double r_sq) {
  const double g = params.gamma(theta);
  const double k = params.K(theta);
  if (g == 0.0) return k;
  return k * std::exp(-g * std::log1p(r_sq));
}

double morse_potential(const MorseSwarmParams& p, double theta, double r) {
  return -p.C_A(theta) * std::exp(-r / p.ell_A) + p.C_R(theta) * std::exp(-r / p.ell_R);
}

double morse_potential_derivative(const MorseSwarmParams& p, double theta, double r) {
  return p.C_A(theta) / p.ell_A * std::exp(-r / p.ell_A) -
         p.C_R(theta) / p.ell_R * std::exp(-r / p.ell_R);
}

VecD morse_force(const MorseSwarmParams& p, double theta, const VecD& dx) {
  const double r = std::hypot(dx[0], dx[1]);
  if (r == 0.0) return {0.0, 0.0};
  const double scale = -morse_potential_derivative(p, theta, r) / r;
  return {scale * dx[0], scale * dx[1]};
}

VecD self_propulsion(const MorseSwarmParams& p, const VecD& v) {
  const double factor = p.a - p.b * (v[0] * v[0] + v[1] * v[1]);
  return {factor * v[0], factor * v[1]};
}

std::string_view to_string(FlockingVerdict verdict) {
  switch (verdict) {
    case FlockingVerdict::Unconditional:
      return "unconditional";
    case FlockingVerdict::ConditionalSatisfied:
      return "conditional-satisfied";
    case FlockingVerdict::ConditionalViolated:
      return "conditional-violated";
  }
  return "unknown";
}

FlockingAssessment flocking_criterion(double gamma, double K, std::size_t N, double Gamma0,
                                      double Lambda0) {
  if (!(K > 0.0)) throw ConfigError("flocking_criterion: K must be positive");
  if (N < 2) throw ConfigError("flocking_criterion: need at least two agents");
  if (!(Gamma0 >= 0.0) || !(Lambda0 >= 0.0)) {
    throw ConfigError("flocking_criterion: spreads must be non-negative");
  }

  FlockingAssessment out;
  if (gamma <= 0.5) return out;

  out.rhs = 2.0 * Gamma0 + 1.0;
  if (Lambda0 == 0.0) {
    out.verdict = FlockingVerdict::ConditionalSatisfied;
    out.degenerate = true;
    out.lhs = std::numeric_limits<double>::infinity();
    return out;
  }

  const double p = 1.0 / (2.0 * gamma - 1.0);
  const double base = 1.0 / (2.0 * gamma);
  const double n = static_cast<double>(N);
  const double prefactor = std::pow(base, p) - std::pow(base, 2.0 * gamma * p);
  out.lhs = prefactor * std::pow(K * K / (8.0 * n * n * Lambda0), p);
  out.verdict = out.lhs > out.rhs ? FlockingVerdict::ConditionalSatisfied
                                  : FlockingVerdict::ConditionalViolated;
  return out;
}

bool linearized_flocking_check(const UncertainScalar& gamma, double gamma0, const GpcBasis& basis) {
  if (gamma0 > 0.5) throw ConfigError("linearized_flocking_check: gamma0 must be <= 1/2");
  const auto nodes = basis.nodes();
  return std::all_of(nodes.begin(), nodes.end(), [&](double t) { return gamma(t) < gamma0; });
}

bool mill_regime(const MorseSwarmParams& params, const ModalQuadrature& quad, int dim) {
  const double ell_pow = std::pow(params.length_ratio(), 2.0 * dim);
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    if (!(params.strength_ratio(quad.theta2(q)) * ell_pow < 1.0)) return false;
  }
  return true;
}

}  // namespace mcgpc
