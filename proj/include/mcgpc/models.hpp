#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "mcgpc/gpc_basis.hpp"

namespace mcgpc {

/// Spatial vector for d = 1 or 2; unused trailing components stay zero.
using VecD = std::array<double, 2>;

/// Model parameter as a function of the random input: c0 + c1 * theta.
class UncertainScalar {
 public:
  constexpr UncertainScalar() = default;
  constexpr UncertainScalar(double constant) : c0_(constant) {}  // NOLINT: implicit by intent
  constexpr UncertainScalar(double c0, double c1) : c0_(c0), c1_(c1) {}

  static constexpr UncertainScalar constant(double c) { return {c, 0.0}; }
  static constexpr UncertainScalar affine(double c0, double c1) { return {c0, c1}; }

  constexpr bool is_constant() const { return c1_ == 0.0; }
  constexpr double c0() const { return c0_; }
  constexpr double c1() const { return c1_; }
  constexpr double operator()(double theta) const { return c1_ == 0.0 ? c0_ : c0_ + c1_ * theta; }

  /// Extremes over a support interval; an affine function attains them at the ends.
  double min_over(double lo, double hi) const;
  double max_over(double lo, double hi) const;

  std::string to_string() const;

  friend constexpr bool operator==(const UncertainScalar&, const UncertainScalar&) = default;

 private:
  double c0_ = 0.0;
  double c1_ = 0.0;
};

struct CuckerSmaleParams {
  UncertainScalar K{1.0};
  UncertainScalar gamma{0.0};

  /// Throws ConfigError unless K > 0 and gamma >= 0 at every quadrature node.
  void validate(const ModalQuadrature& quad) const;
};

struct MorseSwarmParams {
  double a = 0.0;
  double b = 0.0;
  UncertainScalar C_A{0.0};
  UncertainScalar C_R{0.0};
  double ell_A = 1.0;
  double ell_R = 1.0;

  void validate() const;

  /// C(theta) = C_R / C_A and ell = ell_R / ell_A.
  double strength_ratio(double theta) const { return C_R(theta) / C_A(theta); }
  double length_ratio() const { return ell_R / ell_A; }
};

/// H = K(theta) / (1 + r^2)^gamma(theta).
double cs_kernel(const CuckerSmaleParams& params, double theta, double r_sq);

/// U(r) = -C_A e^{-r/ell_A} + C_R e^{-r/ell_R}.
double morse_potential(const MorseSwarmParams& params, double theta, double r);

/// dU/dr.
double morse_potential_derivative(const MorseSwarmParams& params, double theta, double r);

/// -grad_{x_i} U(|x_i - x_j|) for dx = x_i - x_j; zero at dx = 0.
VecD morse_force(const MorseSwarmParams& params, double theta, const VecD& dx);

/// (a - b|v|^2) v.
VecD self_propulsion(const MorseSwarmParams& params, const VecD& v);

enum class FlockingVerdict { Unconditional, ConditionalSatisfied, ConditionalViolated };

std::string_view to_string(FlockingVerdict verdict);

struct FlockingAssessment {
  FlockingVerdict verdict = FlockingVerdict::Unconditional;
  // Set when gamma > 1/2 and the initial velocities are already aligned.
  bool degenerate = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Sufficient flocking condition for the deterministic Cucker-Smale model.
///
/// gamma <= 1/2 flocks unconditionally. Otherwise the left-hand side
///   [(1/2g)^{1/(2g-1)} - (1/2g)^{2g/(2g-1)}] (K^2 / (8 N^2 Lambda0))^{1/(2g-1)}
/// must exceed 2 Gamma0 + 1, where Gamma0 and Lambda0 are the half sums of
/// squared pairwise position and velocity distances.
FlockingAssessment flocking_criterion(double gamma, double K, std::size_t N, double Gamma0,
                                      double Lambda0);

/// Linearized criterion: unconditional velocity flocking when gamma(theta) < gamma0
/// at every quadrature node. Requires gamma0 <= 1/2.
bool linearized_flocking_check(const UncertainScalar& gamma, double gamma0, const GpcBasis& basis);

/// Mill regime C(theta) ell^{2d} < 1 at every node of the rule.
bool mill_regime(const MorseSwarmParams& params, const ModalQuadrature& quad, int dim);

}  // namespace mcgpc
