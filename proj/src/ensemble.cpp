#include "mcgpc/ensemble.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcgpc/errors.hpp"
#include "mcgpc/random.hpp"

namespace mcgpc {

GpcEnsemble::GpcEnsemble(std::size_t n, int dim, std::size_t modes)
    : n_(n), dim_(dim), modes_(modes) {
  if (dim != 1 && dim != 2) throw ConfigError("spatial dimension must be 1 or 2");
  if (modes == 0) throw ConfigError("ensemble needs at least one gPC mode");
  x_.assign(n * static_cast<std::size_t>(dim) * modes, 0.0);
  v_.assign(x_.size(), 0.0);
}

VecD GpcEnsemble::expected_x(std::size_t i) const {
  VecD out{0.0, 0.0};
  for (int c = 0; c < dim_; ++c) out[c] = x_[offset(i, c)];
  return out;
}

VecD GpcEnsemble::expected_v(std::size_t i) const {
  VecD out{0.0, 0.0};
  for (int c = 0; c < dim_; ++c) out[c] = v_[offset(i, c)];
  return out;
}

bool GpcEnsemble::all_finite() const {
  auto finite = [](double z) { return std::isfinite(z); };
  return std::all_of(x_.begin(), x_.end(), finite) && std::all_of(v_.begin(), v_.end(), finite);
}

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::BimodalVelocity1D:
      return "bimodal_velocity";
    case InitialKind::BivariateBimodal1D:
      return "bivariate_bimodal";
    case InitialKind::AnnulusRotating2D:
      return "annulus";
  }
  return "unknown";
}

void InitialCondition::validate() const {
  switch (kind) {
    case InitialKind::BimodalVelocity1D:
    case InitialKind::BivariateBimodal1D:
      if (!(velocity_variance > 0.0)) throw ConfigError("initial velocity variance must be > 0");
      if (!(position_variance >= 0.0)) throw ConfigError("initial position variance must be >= 0");
      if (kind == InitialKind::BivariateBimodal1D && !(position_variance > 0.0)) {
        throw ConfigError("bivariate initial data needs a positive position variance");
      }
      if (!std::isfinite(velocity_mean)) throw ConfigError("initial velocity mean must be finite");
      break;
    case InitialKind::AnnulusRotating2D:
      if (!(inner_radius >= 0.0) || !(inner_radius < outer_radius)) {
        throw ConfigError("annulus needs 0 <= inner radius < outer radius");
      }
      if (!(speed >= 0.0)) throw ConfigError("annulus speed must be >= 0");
      break;
  }
}

InitialCondition InitialCondition::bimodal_velocity(double mu, double sigma2,
                                                    double position_variance) {
  InitialCondition ic;
  ic.kind = InitialKind::BimodalVelocity1D;
  ic.velocity_mean = mu;
  ic.velocity_variance = sigma2;
  ic.position_variance = position_variance;
  return ic;
}

InitialCondition InitialCondition::bivariate_bimodal(double vbar, double sigma_x2, double sigma_v2) {
  InitialCondition ic;
  ic.kind = InitialKind::BivariateBimodal1D;
  ic.velocity_mean = vbar;
  ic.velocity_variance = sigma_v2;
  ic.position_variance = sigma_x2;
  return ic;
}

InitialCondition InitialCondition::annulus(double inner, double outer, double speed,
                                           bool counterclockwise) {
  InitialCondition ic;
  ic.kind = InitialKind::AnnulusRotating2D;
  ic.inner_radius = inner;
  ic.outer_radius = outer;
  ic.speed = speed;
  ic.counterclockwise = counterclockwise;
  return ic;
}

GpcEnsemble sample_initial(const InitialCondition& ic, std::size_t N, std::uint64_t seed,
                           std::size_t modes) {
  if (N < 1) throw ConfigError("need at least one particle");
  ic.validate();
  GpcEnsemble ens(N, ic.dim(), modes);

  const double sigma_v = std::sqrt(ic.velocity_variance);
  const double sigma_x = std::sqrt(ic.position_variance);
  for (std::size_t i = 0; i < N; ++i) {
    KeyedStream rng(seed, kTagInitial, i);
    switch (ic.kind) {
      case InitialKind::BimodalVelocity1D:
      case InitialKind::BivariateBimodal1D: {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        ens.v(i, 0)[0] = sign * ic.velocity_mean + sigma_v * rng.normal();
        ens.x(i, 0)[0] = sigma_x > 0.0 ? sigma_x * rng.normal() : 0.0;
        break;
      }
      case InitialKind::AnnulusRotating2D: {
        const double r2_in = ic.inner_radius * ic.inner_radius;
        const double r2_out = ic.outer_radius * ic.outer_radius;
        const double r = std::sqrt(r2_in + rng.uniform() * (r2_out - r2_in));
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double orient = ic.counterclockwise ? 1.0 : -1.0;
        ens.x(i, 0)[0] = r * c;
        ens.x(i, 1)[0] = r * s;
        // k x (x/|x|) is the counterclockwise unit tangent.
        ens.v(i, 0)[0] = -orient * ic.speed * s;
        ens.v(i, 1)[0] = orient * ic.speed * c;
        break;
      }
    }
  }
  return ens;
}

ParticleState evaluate_at_theta(const GpcEnsemble& ens, std::size_t i, double theta,
                                const GpcBasis& basis) {
  if (i >= ens.size()) throw std::out_of_range("particle index " + std::to_string(i) + " out of range");
  if (basis.modes() != ens.modes()) throw DimensionError("basis and ensemble mode counts differ");
  ParticleState s;
  for (int c = 0; c < ens.dim(); ++c) {
    s.x[c] = reconstruct_at(ens.x(i, c), theta, basis);
    s.v[c] = reconstruct_at(ens.v(i, c), theta, basis);
  }
  return s;
}

ParticleState evaluate_at_theta(const GpcEnsemble& ens, std::size_t i, double theta1,
                                double theta2, const TensorBasis2D& basis) {
  if (i >= ens.size()) throw std::out_of_range("particle index " + std::to_string(i) + " out of range");
  if (basis.modes() != ens.modes()) throw DimensionError("basis and ensemble mode counts differ");
  ParticleState s;
  for (int c = 0; c < ens.dim(); ++c) {
    s.x[c] = basis.reconstruct_at(ens.x(i, c), theta1, theta2);
    s.v[c] = basis.reconstruct_at(ens.v(i, c), theta1, theta2);
  }
  return s;
}

void write_ensemble_snapshot(const GpcEnsemble& ens, const SnapshotMeta& meta,
                             const std::filesystem::path& csv_path,
                             const std::filesystem::path& meta_path) {
  auto out = fmt::output_file(csv_path.string());
  out.print("i,dim,mode,x_hat,v_hat\n");
  for (std::size_t i = 0; i < ens.size(); ++i) {
    for (int c = 0; c < ens.dim(); ++c) {
      const auto xs = ens.x(i, c);
      const auto vs = ens.v(i, c);
      for (std::size_t m = 0; m < ens.modes(); ++m) {
        out.print("{},{},{},{:.17g},{:.17g}\n", i, c, m, xs[m], vs[m]);
      }
    }
  }
  out.close();

  auto side = fmt::output_file(meta_path.string());
  side.print("N={}\nd={}\nM={}\nmodes={}\nfamily={}\ntime={:.17g}\nseed={}\n", ens.size(), ens.dim(),
             meta.order, ens.modes(), meta.family, ens.time(), meta.seed);
  side.close();
}

}  // namespace mcgpc
