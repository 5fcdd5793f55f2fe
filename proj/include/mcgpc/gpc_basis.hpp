#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcgpc {

/// Orthogonal polynomial family of the random input (Wiener-Askey scheme).
///
/// Legendre pairs with the uniform law on [-1, 1]; Hermite (probabilists'
/// convention) pairs with the standard Gaussian law. The remaining
/// Wiener-Askey families (Laguerre/Gamma, Jacobi/Beta, ...) would slot in as
/// new enumerators together with their recurrence coefficients.
enum class PolynomialFamily { Legendre, Hermite };

std::string_view to_string(PolynomialFamily family);
PolynomialFamily parse_family(std::string_view name);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Orthogonal basis Phi_0..Phi_M together with its Gauss quadrature rule.
///
/// Quadrature weights absorb the probability density, so they sum to one.
/// Immutable after construction and safe to share between threads.
class GpcBasis {
 public:
  /// `quad_points` <= 0 selects the default Q = 2(M+1).
  GpcBasis(PolynomialFamily family, int order, int quad_points = 0);

  PolynomialFamily family() const { return family_; }
  int order() const { return order_; }
  std::size_t modes() const { return static_cast<std::size_t>(order_) + 1; }
  std::size_t quad_size() const { return nodes_.size(); }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> sq_norms() const { return sq_norms_; }

  /// Phi_h evaluated at quadrature node q.
  double value(std::size_t h, std::size_t q) const { return table_[h * quad_size() + q]; }

  /// Fills out[0..M] with Phi_h(theta) using the three-term recurrence.
  void evaluate(double theta, std::span<double> out) const;
  std::vector<double> evaluate(double theta) const;

  /// Closed support of the density; infinite bounds for Hermite.
  std::pair<double, double> support() const;
  bool in_support(double theta) const;

 private:
  PolynomialFamily family_;
  int order_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> table_;  // (M+1) x Q, row-major by mode
  std::vector<double> sq_norms_;
};

/// Normalized Galerkin coefficients c_h = sum_q w_q f(theta_q) Phi_h(theta_q) / ||Phi_h||^2.
std::vector<double> project(std::span<const double> samples_at_nodes, const GpcBasis& basis);

double reconstruct_at(std::span<const double> coeffs, double theta, const GpcBasis& basis);

/// Mean is coeffs[0]; variance is sum_{h>=1} coeffs[h]^2 ||Phi_h||^2.
MeanVariance expectation_and_variance(std::span<const double> coeffs, const GpcBasis& basis);

/// Product basis Phi_k(theta1) Psi_h(theta2) for two independent inputs.
/// Joint mode (k, h) is stored at flat index k * (M2 + 1) + h.
class TensorBasis2D {
 public:
  TensorBasis2D(GpcBasis first, GpcBasis second);

  const GpcBasis& first() const { return first_; }
  const GpcBasis& second() const { return second_; }
  std::size_t modes() const { return first_.modes() * second_.modes(); }
  std::size_t mode_index(std::size_t k, std::size_t h) const { return k * second_.modes() + h; }

  double reconstruct_at(std::span<const double> coeffs, double theta1, double theta2) const;

 private:
  GpcBasis first_;
  GpcBasis second_;
};

/// Flattened node/mode tables shared by the particle solver and diagnostics.
///
/// A one-dimensional basis maps to Q nodes with theta2 == theta1, so code that
/// reads theta1 for alignment parameters and theta2 for potential parameters
/// works unchanged for both layouts.
class ModalQuadrature {
 public:
  explicit ModalQuadrature(const GpcBasis& basis);
  explicit ModalQuadrature(const TensorBasis2D& basis);

  std::size_t modes() const { return sq_norms_.size(); }
  std::size_t nodes() const { return weights_.size(); }
  bool two_dimensional() const { return two_dimensional_; }

  double weight(std::size_t q) const { return weights_[q]; }
  double theta1(std::size_t q) const { return theta1_[q]; }
  double theta2(std::size_t q) const { return theta2_[q]; }
  double sq_norm(std::size_t m) const { return sq_norms_[m]; }
  std::span<const double> weights() const { return weights_; }

  /// Basis values of every mode at node q.
  std::span<const double> phi(std::size_t q) const {
    return {values_.data() + q * modes(), modes()};
  }
  /// w_q Phi_m(q) / ||Phi_m||^2, laid out node-major like phi().
  std::span<const double> projector(std::size_t q) const {
    return {projector_.data() + q * modes(), modes()};
  }

  double reconstruct(std::span<const double> coeffs, std::size_t q) const;
  /// out[m] = sum_q projector(q)[m] * node_values[q]
  void project(std::span<const double> node_values, std::span<double> out) const;
  MeanVariance mean_variance(std::span<const double> coeffs) const;

 private:
  bool two_dimensional_ = false;
  std::vector<double> weights_;
  std::vector<double> theta1_;
  std::vector<double> theta2_;
  std::vector<double> values_;
  std::vector<double> projector_;
  std::vector<double> sq_norms_;
};

}  // namespace mcgpc
