#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "mcgpc/gpc_basis.hpp"
#include "mcgpc/models.hpp"

namespace mcgpc {

struct VelocityGrid {
  double v_min = -2.0;
  double v_max = 2.0;
  std::size_t n_points = 101;

  double dv() const { return (v_max - v_min) / static_cast<double>(n_points - 1); }
  double point(std::size_t j) const { return v_min + static_cast<double>(j) * dv(); }
  void validate() const;
};

/// Stochastic Galerkin coefficients f_h(v_j, t) of the space-homogeneous density.
struct SgDensity {
  VelocityGrid grid;
  std::size_t modes = 1;
  std::vector<double> coeffs;  // [mode][grid point]
  double time = 0.0;
  double drift = 0.0;  // the velocity u every mode relaxes toward

  std::span<const double> mode(std::size_t h) const {
    return {coeffs.data() + h * grid.n_points, grid.n_points};
  }
  /// sum_j f_0(v_j) dv
  double mass() const;
};

struct OracleOptions {
  /// Recompute u from the current mode-0 density at every stage instead of
  /// keeping the initial mean.
  bool recompute_drift = false;
  std::size_t observer_stride = 1;
};

using OracleObserver = std::function<void(const SgDensity&)>;

/// Symmetric bimodal Gaussian sampled on the grid and scaled to unit discrete mass.
std::vector<double> discretize_bimodal(const VelocityGrid& grid, double mu, double sigma2);

/// Solves d/dt f_h = (1/||Phi_h||^2) d/dv [ sum_k (v - u) H_hk f_k ], H_hk = E[K Phi_h Phi_k],
/// with central differences in flux form (zero flux through the domain ends)
/// and classical RK4 in time. Requires dt <= dv^2.
SgDensity sg_homogeneous_solve(std::span<const double> f0, const UncertainScalar& K,
                               const GpcBasis& basis, const VelocityGrid& grid, double dt, double t_end,
                               const OracleObserver& observer = {}, OracleOptions options = {});

/// E_theta[ int (v - u)^2 f(theta, v) dv ] by quadrature over the basis nodes.
double oracle_expected_temperature(const SgDensity& sol, const GpcBasis& basis);

/// CSV: one row per grid point, columns `v,mode0,...,modeM`; sidecar with key=value metadata.
void write_sg_density(const SgDensity& sol, const GpcBasis& basis, const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path);

}  // namespace mcgpc
