#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcgpc/gpc_basis.hpp"
#include "mcgpc/models.hpp"

namespace mcgpc {

/// N particles whose position and velocity components are gPC coefficient vectors.
///
/// Storage is [particle][component][mode] with the mode index innermost, which
/// is the access pattern of node reconstruction in the solver hot loop.
class GpcEnsemble {
 public:
  GpcEnsemble() = default;
  GpcEnsemble(std::size_t n, int dim, std::size_t modes);

  std::size_t size() const { return n_; }
  int dim() const { return dim_; }
  std::size_t modes() const { return modes_; }

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::size_t offset(std::size_t i, int c) const {
    return (i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(c)) * modes_;
  }

  std::span<double> x(std::size_t i, int c) { return {x_.data() + offset(i, c), modes_}; }
  std::span<double> v(std::size_t i, int c) { return {v_.data() + offset(i, c), modes_}; }
  std::span<const double> x(std::size_t i, int c) const { return {x_.data() + offset(i, c), modes_}; }
  std::span<const double> v(std::size_t i, int c) const { return {v_.data() + offset(i, c), modes_}; }

  std::vector<double>& x_data() { return x_; }
  std::vector<double>& v_data() { return v_; }
  const std::vector<double>& x_data() const { return x_; }
  const std::vector<double>& v_data() const { return v_; }

  /// Mode-0 (expected) position / velocity of particle i.
  VecD expected_x(std::size_t i) const;
  VecD expected_v(std::size_t i) const;

  bool all_finite() const;

 private:
  std::size_t n_ = 0;
  int dim_ = 1;
  std::size_t modes_ = 1;
  double time_ = 0.0;
  std::vector<double> x_;
  std::vector<double> v_;
};

enum class InitialKind { BimodalVelocity1D, BivariateBimodal1D, AnnulusRotating2D };

std::string_view to_string(InitialKind kind);

/// Deterministic initial data of the three experiment families.
struct InitialCondition {
  InitialKind kind = InitialKind::BimodalVelocity1D;

  // Velocity mixture 0.5 N(+mean, var) + 0.5 N(-mean, var).
  double velocity_mean = 0.25;
  double velocity_variance = 0.1;
  // Gaussian position spread; zero places every particle at the origin.
  double position_variance = 0.0;

  // Uniform annulus inner <= |x| <= outer with tangential velocity of fixed speed.
  double inner_radius = 0.5;
  double outer_radius = 1.0;
  double speed = 1.0;
  bool counterclockwise = true;

  int dim() const { return kind == InitialKind::AnnulusRotating2D ? 2 : 1; }
  void validate() const;

  /// sigma^2 = 0.1, mu = 1/4; positions at the origin.
  static InitialCondition bimodal_velocity(double mu = 0.25, double sigma2 = 0.1,
                                           double position_variance = 0.0);
  /// x ~ N(0, 0.5), v ~ 0.5 N(1, 0.2) + 0.5 N(-1, 0.2).
  static InitialCondition bivariate_bimodal(double vbar = 1.0, double sigma_x2 = 0.5,
                                            double sigma_v2 = 0.2);
  static InitialCondition annulus(double inner = 0.5, double outer = 1.0, double speed = 1.0,
                                  bool counterclockwise = true);
};

/// Draws N i.i.d. particles into mode 0; higher modes are zero.
/// Particle i uses its own keyed stream, so the first N' particles of a
/// larger draw with the same seed coincide with a draw of size N'.
GpcEnsemble sample_initial(const InitialCondition& ic, std::size_t N, std::uint64_t seed,
                           std::size_t modes);

struct ParticleState {
  VecD x{0.0, 0.0};
  VecD v{0.0, 0.0};
};

ParticleState evaluate_at_theta(const GpcEnsemble& ens, std::size_t i, double theta,
                                const GpcBasis& basis);
ParticleState evaluate_at_theta(const GpcEnsemble& ens, std::size_t i, double theta1,
                                double theta2, const TensorBasis2D& basis);

struct SnapshotMeta {
  int order = 0;
  std::string family = "legendre";
  std::uint64_t seed = 0;
};

/// CSV `i,dim,mode,x_hat,v_hat` plus a key=value sidecar (N, d, M, family, time, seed).
void write_ensemble_snapshot(const GpcEnsemble& ens, const SnapshotMeta& meta,
                             const std::filesystem::path& csv_path,
                             const std::filesystem::path& meta_path);

}  // namespace mcgpc
