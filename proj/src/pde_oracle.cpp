#include "mcgpc/pde_oracle.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "mcgpc/errors.hpp"

namespace mcgpc {

void VelocityGrid::validate() const {
  if (!(v_min < v_max)) throw ConfigError("velocity grid needs v_min < v_max");
  if (n_points < 3) throw ConfigError("velocity grid needs at least 3 points");
}

double SgDensity::mass() const {
  const auto f0 = mode(0);
  double m = 0.0;
  for (double z : f0) m += z;
  return m * grid.dv();
}

std::vector<double> discretize_bimodal(const VelocityGrid& grid, double mu, double sigma2) {
  grid.validate();
  if (!(sigma2 > 0.0)) throw ConfigError("bimodal variance must be > 0");
  std::vector<double> f(grid.n_points);
  double mass = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double v = grid.point(j);
    f[j] = std::exp(-(v - mu) * (v - mu) / (2.0 * sigma2)) + std::exp(-(v + mu) * (v + mu) / (2.0 * sigma2));
    mass += f[j];
  }
  mass *= grid.dv();
  for (double& z : f) z /= mass;
  return f;
}

namespace {

class HomogeneousSgOperator {
 public:
  HomogeneousSgOperator(const UncertainScalar& K, const GpcBasis& basis, const VelocityGrid& grid)
      : modes_(basis.modes()), n_(grid.n_points), grid_(grid), galerkin_(modes_ * modes_, 0.0) {
    // galerkin_[h][k] = E[K Phi_h Phi_k] / ||Phi_h||^2
    for (std::size_t q = 0; q < basis.quad_size(); ++q) {
      const double wk = basis.weights()[q] * K(basis.nodes()[q]);
      for (std::size_t h = 0; h < modes_; ++h) {
        for (std::size_t k = 0; k < modes_; ++k) {
          galerkin_[h * modes_ + k] += wk * basis.value(h, q) * basis.value(k, q);
        }
      }
    }
    for (std::size_t h = 0; h < modes_; ++h) {
      for (std::size_t k = 0; k < modes_; ++k) galerkin_[h * modes_ + k] /= basis.sq_norms()[h];
    }
    mixed_.resize(n_);
    flux_.resize(n_ + 1);
  }

  void apply(std::span<const double> f, double u, std::span<double> rate) {
    const double inv_dv = 1.0 / grid_.dv();
    for (std::size_t h = 0; h < modes_; ++h) {
      for (std::size_t j = 0; j < n_; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < modes_; ++k) s += galerkin_[h * modes_ + k] * f[k * n_ + j];
        mixed_[j] = (grid_.point(j) - u) * s;
      }
      flux_[0] = 0.0;
      flux_[n_] = 0.0;
      for (std::size_t j = 0; j + 1 < n_; ++j) flux_[j + 1] = 0.5 * (mixed_[j] + mixed_[j + 1]);
      for (std::size_t j = 0; j < n_; ++j) rate[h * n_ + j] = (flux_[j + 1] - flux_[j]) * inv_dv;
    }
  }

 private:
  std::size_t modes_;
  std::size_t n_;
  VelocityGrid grid_;
  std::vector<double> galerkin_;
  std::vector<double> mixed_;
  std::vector<double> flux_;
};

double mean_velocity(std::span<const double> f0, const VelocityGrid& grid) {
  double mass = 0.0;
  double mom = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    mass += f0[j];
    mom += grid.point(j) * f0[j];
  }
  return mom / mass;
}

}  // namespace

SgDensity sg_homogeneous_solve(std::span<const double> f0, const UncertainScalar& K,
                               const GpcBasis& basis, const VelocityGrid& grid, double dt, double t_end,
                               const OracleObserver& observer, OracleOptions options) {
  grid.validate();
  if (f0.size() != grid.n_points) throw DimensionError("initial density does not match the grid");
  if (std::any_of(f0.begin(), f0.end(), [](double z) { return !(z >= 0.0); })) {
    throw ConfigError("initial density must be non-negative");
  }
  const double dv = grid.dv();
  if (!(dt > 0.0) || dt > dv * dv * (1.0 + 1e-12)) {
    throw ConfigError("oracle time step dt=" + std::to_string(dt) + " violates 0 < dt <= dv^2 = " +
                      std::to_string(dv * dv));
  }
  if (!(t_end >= 0.0)) throw ConfigError("oracle t_end must be >= 0");
  for (std::size_t q = 0; q < basis.quad_size(); ++q) {
    if (!(K(basis.nodes()[q]) > 0.0)) throw ConfigError("oracle needs K(theta) > 0 at every node");
  }
  if (options.observer_stride == 0) options.observer_stride = 1;

  SgDensity sol;
  sol.grid = grid;
  sol.modes = basis.modes();
  sol.coeffs.assign(sol.modes * grid.n_points, 0.0);
  std::copy(f0.begin(), f0.end(), sol.coeffs.begin());
  const double mass0 = sol.mass();
  if (std::abs(mass0 - 1.0) > 1e-6) {
    throw ConfigError("initial density must have unit mass (got " + std::to_string(mass0) + ")");
  }
  sol.drift = mean_velocity(f0, grid);

  HomogeneousSgOperator op(K, basis, grid);
  const std::size_t len = sol.coeffs.size();
  std::vector<double> k1(len), k2(len), k3(len), k4(len), stage(len);
  auto drift_of = [&](std::span<const double> f) {
    return options.recompute_drift ? mean_velocity(f.subspan(0, grid.n_points), grid) : sol.drift;
  };

  if (observer) observer(sol);
  const auto steps = t_end > 0.0 ? static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)) : 0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double h = n == steps ? t_end - static_cast<double>(n - 1) * dt : dt;
    auto& f = sol.coeffs;
    op.apply(f, drift_of(f), k1);
    for (std::size_t k = 0; k < len; ++k) stage[k] = f[k] + 0.5 * h * k1[k];
    op.apply(stage, drift_of(stage), k2);
    for (std::size_t k = 0; k < len; ++k) stage[k] = f[k] + 0.5 * h * k2[k];
    op.apply(stage, drift_of(stage), k3);
    for (std::size_t k = 0; k < len; ++k) stage[k] = f[k] + h * k3[k];
    op.apply(stage, drift_of(stage), k4);
    for (std::size_t k = 0; k < len; ++k) f[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    sol.time = n == steps ? t_end : static_cast<double>(n) * dt;
    if (options.recompute_drift) sol.drift = drift_of(f);

    const double drift = sol.mass() - mass0;
    if (!std::isfinite(drift) || std::abs(drift) > 1e-6) {
      throw NumericalError("oracle mass drifted by " + std::to_string(drift) + " at t=" +
                           std::to_string(sol.time));
    }
    if (observer && (n % options.observer_stride == 0 || n == steps)) observer(sol);
  }
  return sol;
}

double oracle_expected_temperature(const SgDensity& sol, const GpcBasis& basis) {
  if (basis.modes() != sol.modes) throw DimensionError("oracle solution and basis mode counts differ");
  const std::size_t n = sol.grid.n_points;
  const double dv = sol.grid.dv();
  double total = 0.0;
  for (std::size_t q = 0; q < basis.quad_size(); ++q) {
    double node_t = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double f = 0.0;
      for (std::size_t h = 0; h < sol.modes; ++h) f += sol.coeffs[h * n + j] * basis.value(h, q);
      const double w = sol.grid.point(j) - sol.drift;
      node_t += w * w * f;
    }
    total += basis.weights()[q] * node_t * dv;
  }
  return total;
}

void write_sg_density(const SgDensity& sol, const GpcBasis& basis, const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path) {
  auto out = fmt::output_file(csv_path.string());
  out.print("v");
  for (std::size_t h = 0; h < sol.modes; ++h) out.print(",mode{}", h);
  out.print("\n");
  const std::size_t n = sol.grid.n_points;
  for (std::size_t j = 0; j < n; ++j) {
    out.print("{:.17g}", sol.grid.point(j));
    for (std::size_t h = 0; h < sol.modes; ++h) out.print(",{:.17g}", sol.coeffs[h * n + j]);
    out.print("\n");
  }
  out.close();

  auto side = fmt::output_file(meta_path.string());
  side.print("grid_points={}\nv_min={:.17g}\nv_max={:.17g}\nM={}\nfamily={}\ntime={:.17g}\ndrift={:.17g}\nmass={:.17g}\n",
             n, sol.grid.v_min, sol.grid.v_max, basis.order(), to_string(basis.family()), sol.time,
             sol.drift, sol.mass());
  side.close();
}

}  // namespace mcgpc
