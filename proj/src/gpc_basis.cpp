#include "mcgpc/gpc_basis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mcgpc/errors.hpp"

namespace mcgpc {

namespace {

// Monic recurrence p_{n+1} = (t - alpha_n) p_n - beta_n p_{n-1}. Both
// families are symmetric, so alpha_n = 0.
double monic_beta(PolynomialFamily family, int n) {
  switch (family) {
    case PolynomialFamily::Legendre: {
      const double nn = static_cast<double>(n) * n;
      return nn / (4.0 * nn - 1.0);
    }
    case PolynomialFamily::Hermite:
      return static_cast<double>(n);
  }
  throw ConfigError("unsupported polynomial family");
}

double closed_form_sq_norm(PolynomialFamily family, int n) {
  switch (family) {
    case PolynomialFamily::Legendre:
      return 1.0 / (2.0 * n + 1.0);
    case PolynomialFamily::Hermite:
      return std::tgamma(static_cast<double>(n) + 1.0);
  }
  throw ConfigError("unsupported polynomial family");
}

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix, weights
// the squared first eigenvector components (density has unit mass).
void gauss_rule(PolynomialFamily family, int points, std::vector<double>& nodes,
                std::vector<double>& weights) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
  Eigen::VectorXd sub(std::max(points - 1, 0));
  for (int n = 1; n < points; ++n) sub[n - 1] = std::sqrt(monic_beta(family, n));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Gauss rule eigenvalue solve did not converge");
  }

  nodes.resize(points);
  weights.resize(points);
  for (int q = 0; q < points; ++q) {
    nodes[q] = solver.eigenvalues()[q];
    const double v0 = solver.eigenvectors()(0, q);
    weights[q] = v0 * v0;
  }
  // Symmetric rules: enforce exact mirror symmetry so odd moments vanish.
  for (int q = 0; q < points / 2; ++q) {
    const int r = points - 1 - q;
    const double x = 0.5 * (nodes[r] - nodes[q]);
    const double w = 0.5 * (weights[q] + weights[r]);
    nodes[q] = -x;
    nodes[r] = x;
    weights[q] = weights[r] = w;
  }
  if (points % 2 == 1) nodes[points / 2] = 0.0;

  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
}

}  // namespace

std::string_view to_string(PolynomialFamily family) {
  switch (family) {
    case PolynomialFamily::Legendre:
      return "legendre";
    case PolynomialFamily::Hermite:
      return "hermite";
  }
  return "unknown";
}

PolynomialFamily parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "legendre" || lower == "uniform") return PolynomialFamily::Legendre;
  if (lower == "hermite" || lower == "gaussian") return PolynomialFamily::Hermite;
  throw ConfigError("unsupported polynomial family '" + std::string(name) +
                    "' (expected legendre or hermite)");
}

GpcBasis::GpcBasis(PolynomialFamily family, int order, int quad_points)
    : family_(family), order_(order) {
  if (family != PolynomialFamily::Legendre && family != PolynomialFamily::Hermite) {
    throw ConfigError("unsupported polynomial family");
  }
  if (order < 0) throw ConfigError("gPC order must be non-negative");
  const int points = quad_points > 0 ? quad_points : 2 * (order + 1);
  if (points < order + 1) {
    throw QuadratureError("quadrature with " + std::to_string(points) +
                      " points cannot integrate a basis of order " + std::to_string(order) +
                      " (need at least M+1 = " + std::to_string(order + 1) + ")");
  }

  gauss_rule(family, points, nodes_, weights_);

  const std::size_t m = modes();
  sq_norms_.resize(m);
  for (std::size_t h = 0; h < m; ++h) sq_norms_[h] = closed_form_sq_norm(family, static_cast<int>(h));

  table_.resize(m * quad_size());
  std::vector<double> column(m);
  for (std::size_t q = 0; q < quad_size(); ++q) {
    evaluate(nodes_[q], column);
    for (std::size_t h = 0; h < m; ++h) table_[h * quad_size() + q] = column[h];
  }
}

void GpcBasis::evaluate(double theta, std::span<double> out) const {
  if (out.size() != modes()) throw DimensionError("basis evaluation buffer has wrong length");
  out[0] = 1.0;
  if (order_ == 0) return;
  out[1] = theta;
  for (int n = 1; n < order_; ++n) {
    switch (family_) {
      case PolynomialFamily::Legendre:
        out[n + 1] = ((2.0 * n + 1.0) * theta * out[n] - n * out[n - 1]) / (n + 1.0);
        break;
      case PolynomialFamily::Hermite:
        out[n + 1] = theta * out[n] - n * out[n - 1];
        break;
    }
  }
}

std::vector<double> GpcBasis::evaluate(double theta) const {
  std::vector<double> out(modes());
  evaluate(theta, out);
  return out;
}

std::pair<double, double> GpcBasis::support() const {
  if (family_ == PolynomialFamily::Legendre) return {-1.0, 1.0};
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

bool GpcBasis::in_support(double theta) const {
  const auto [lo, hi] = support();
  return theta >= lo && theta <= hi;
}

std::vector<double> project(std::span<const double> samples_at_nodes, const GpcBasis& basis) {
  if (samples_at_nodes.size() != basis.quad_size()) {
    throw DimensionError("project: got " + std::to_string(samples_at_nodes.size()) +
                         " samples for a rule with " + std::to_string(basis.quad_size()) + " nodes");
  }
  std::vector<double> coeffs(basis.modes(), 0.0);
  const auto w = basis.weights();
  for (std::size_t h = 0; h < basis.modes(); ++h) {
    double acc = 0.0;
    for (std::size_t q = 0; q < basis.quad_size(); ++q) {
      acc += w[q] * samples_at_nodes[q] * basis.value(h, q);
    }
    coeffs[h] = acc / basis.sq_norms()[h];
  }
  return coeffs;
}

double reconstruct_at(std::span<const double> coeffs, double theta, const GpcBasis& basis) {
  if (coeffs.size() != basis.modes()) throw DimensionError("reconstruct_at: coefficient length mismatch");
  const auto phi = basis.evaluate(theta);
  double value = 0.0;
  for (std::size_t h = 0; h < coeffs.size(); ++h) value += coeffs[h] * phi[h];
  return value;
}

MeanVariance expectation_and_variance(std::span<const double> coeffs, const GpcBasis& basis) {
  if (coeffs.size() != basis.modes()) {
    throw DimensionError("expectation_and_variance: coefficient length mismatch");
  }
  MeanVariance out;
  out.mean = coeffs[0];
  for (std::size_t h = 1; h < coeffs.size(); ++h) out.variance += coeffs[h] * coeffs[h] * basis.sq_norms()[h];
  return out;
}

TensorBasis2D::TensorBasis2D(GpcBasis first, GpcBasis second)
    : first_(std::move(first)), second_(std::move(second)) {}

double TensorBasis2D::reconstruct_at(std::span<const double> coeffs, double theta1,
                                     double theta2) const {
  if (coeffs.size() != modes()) throw DimensionError("tensor reconstruct_at: coefficient length mismatch");
  const auto phi = first_.evaluate(theta1);
  const auto psi = second_.evaluate(theta2);
  double value = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    for (std::size_t h = 0; h < psi.size(); ++h) value += coeffs[mode_index(k, h)] * phi[k] * psi[h];
  }
  return value;
}

ModalQuadrature::ModalQuadrature(const GpcBasis& basis) {
  const std::size_t m = basis.modes();
  const std::size_t nq = basis.quad_size();
  weights_.assign(basis.weights().begin(), basis.weights().end());
  theta1_.assign(basis.nodes().begin(), basis.nodes().end());
  theta2_ = theta1_;
  sq_norms_.assign(basis.sq_norms().begin(), basis.sq_norms().end());
  values_.resize(nq * m);
  projector_.resize(nq * m);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t h = 0; h < m; ++h) {
      values_[q * m + h] = basis.value(h, q);
      projector_[q * m + h] = weights_[q] * basis.value(h, q) / sq_norms_[h];
    }
  }
}

ModalQuadrature::ModalQuadrature(const TensorBasis2D& basis) : two_dimensional_(true) {
  const GpcBasis& b1 = basis.first();
  const GpcBasis& b2 = basis.second();
  const std::size_t m = basis.modes();
  const std::size_t nq = b1.quad_size() * b2.quad_size();
  weights_.resize(nq);
  theta1_.resize(nq);
  theta2_.resize(nq);
  values_.resize(nq * m);
  projector_.resize(nq * m);
  sq_norms_.resize(m);
  for (std::size_t k = 0; k < b1.modes(); ++k) {
    for (std::size_t h = 0; h < b2.modes(); ++h) {
      sq_norms_[basis.mode_index(k, h)] = b1.sq_norms()[k] * b2.sq_norms()[h];
    }
  }
  for (std::size_t q1 = 0; q1 < b1.quad_size(); ++q1) {
    for (std::size_t q2 = 0; q2 < b2.quad_size(); ++q2) {
      const std::size_t q = q1 * b2.quad_size() + q2;
      weights_[q] = b1.weights()[q1] * b2.weights()[q2];
      theta1_[q] = b1.nodes()[q1];
      theta2_[q] = b2.nodes()[q2];
      for (std::size_t k = 0; k < b1.modes(); ++k) {
        for (std::size_t h = 0; h < b2.modes(); ++h) {
          const std::size_t mode = basis.mode_index(k, h);
          const double v = b1.value(k, q1) * b2.value(h, q2);
          values_[q * m + mode] = v;
          projector_[q * m + mode] = weights_[q] * v / sq_norms_[mode];
        }
      }
    }
  }
}

double ModalQuadrature::reconstruct(std::span<const double> coeffs, std::size_t q) const {
  const auto p = phi(q);
  double value = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) value += coeffs[m] * p[m];
  return value;
}

void ModalQuadrature::project(std::span<const double> node_values, std::span<double> out) const {
  if (node_values.size() != nodes() || out.size() != modes()) {
    throw DimensionError("ModalQuadrature::project: size mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t q = 0; q < nodes(); ++q) {
    const auto p = projector(q);
    for (std::size_t m = 0; m < p.size(); ++m) out[m] += p[m] * node_values[q];
  }
}

MeanVariance ModalQuadrature::mean_variance(std::span<const double> coeffs) const {
  if (coeffs.size() != modes()) throw DimensionError("mean_variance: coefficient length mismatch");
  MeanVariance out;
  out.mean = coeffs[0];
  for (std::size_t m = 1; m < coeffs.size(); ++m) out.variance += coeffs[m] * coeffs[m] * sq_norms_[m];
  return out;
}

}  // namespace mcgpc
