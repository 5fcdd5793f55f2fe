#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mcgpc/ensemble.hpp"
#include "mcgpc/gpc_basis.hpp"
#include "mcgpc/models.hpp"

namespace mcgpc {

enum class Integrator { RK4, Euler };

/// When the per-particle interaction partners are redrawn.
enum class ResamplePolicy { PerStep, PerStage };

/// Which forces act and how their parameters depend on the random input.
///
/// With a one-dimensional basis every parameter is a function of theta. With a
/// tensor basis the alignment parameters (K, gamma) depend on theta1 and the
/// Morse strengths (C_A, C_R) on theta2.
struct ModelSpec {
  std::optional<CuckerSmaleParams> alignment;
  std::optional<MorseSwarmParams> morse;
  std::variant<GpcBasis, TensorBasis2D> uncertainty{GpcBasis(PolynomialFamily::Legendre, 0)};

  std::size_t modes() const;
  bool two_dimensional_uncertainty() const { return uncertainty.index() == 1; }
  ModalQuadrature quadrature() const;
  void validate() const;
};

struct SolverConfig {
  double dt = 0.01;
  double t_end = 1.0;
  std::size_t S = 1;  // interaction partners per particle and step
  std::uint64_t seed = 1;
  ModelSpec model;
  Integrator integrator = Integrator::RK4;
  ResamplePolicy resample = ResamplePolicy::PerStep;
  int threads = 1;
  std::size_t observer_stride = 1;

  void validate(std::size_t N) const;
  std::uint64_t step_count() const;
};

/// e_{hk} = (1/||Phi_h||^2) sum_q w_q H(theta_q; |x_i - x_j|) Phi_k Phi_h at the nodes.
Eigen::MatrixXd interaction_coeffs(const GpcEnsemble& ens, std::size_t i, std::size_t j,
                                   const CuckerSmaleParams& params, const GpcBasis& basis);

/// MC-gPC particle integrator.
///
/// Each step draws one subsample of S distinct partners per particle (self
/// allowed) and keeps it for all Runge-Kutta stages. Particle rows are updated
/// independently from a snapshot of the stage state, so any thread count
/// gives bit-identical results.
class McGpcSolver {
 public:
  explicit McGpcSolver(SolverConfig cfg);

  const SolverConfig& config() const { return cfg_; }
  const ModalQuadrature& quadrature() const { return quad_; }

  /// Advances the ensemble by `dt` (defaults to the configured step).
  /// `step_index` keys the subsample streams.
  void step(GpcEnsemble& ens, std::uint64_t step_index);
  void step(GpcEnsemble& ens, std::uint64_t step_index, double dt);

  /// dv_hat_i/dt for an explicit partner list, as a [component][mode] vector.
  std::vector<double> velocity_rate(const GpcEnsemble& ens, std::size_t i,
                                    std::span<const std::uint32_t> partners);

  /// Partner indices particle i uses in the given step (and stage, when resampling per stage).
  std::vector<std::uint32_t> partners(std::size_t N, std::size_t i, std::uint64_t step_index,
                                      int stage = 0) const;

 private:
  struct Scratch;

  void prepare(std::size_t N, int dim);
  void evaluate_nodes(std::span<const double> x, std::span<const double> v);
  void compute_rates(std::span<const double> x, std::span<const double> v, std::uint64_t step_index,
                     int stage, std::span<double> dv);
  void particle_rate(std::size_t i, std::span<const double> v_coeffs,
                     std::span<const std::uint32_t> partners, const double* full_mean,
                     std::span<double> out, Scratch& scratch) const;
  void fill_partners(std::size_t N, std::size_t i, std::uint64_t step_index, int stage,
                     std::span<std::uint32_t> out, std::vector<unsigned char>& marks) const;

  SolverConfig cfg_;
  ModalQuadrature quad_;
  std::size_t N_ = 0;
  int dim_ = 1;

  // Per-node parameter values.
  std::vector<double> K_;
  std::vector<double> gamma_;
  std::vector<double> C_A_;
  std::vector<double> C_R_;
  bool kernel_position_free_ = false;
  std::vector<double> galerkin_K_;  // modes x modes, used when the kernel ignores positions

  // Node values of the current stage state, [particle][node][component].
  std::vector<double> node_x_;
  std::vector<double> node_v_;

  std::vector<std::uint32_t> partner_table_;
  bool partners_stored_ = false;
  std::uint64_t stored_step_ = 0;
  int stored_stage_ = -1;
};

using Observer = std::function<void(const GpcEnsemble&, std::uint64_t step)>;

struct RunResult {
  GpcEnsemble final_state;
  std::uint64_t steps = 0;
};

/// Samples the initial ensemble and integrates to t_end. Observers fire at
/// step 0, every `observer_stride` steps, and at the final step.
RunResult run(const InitialCondition& ic, std::size_t N, const SolverConfig& cfg,
              std::span<const Observer> observers = {});

/// Same as `run` starting from a given ensemble.
RunResult run_from(GpcEnsemble ens, const SolverConfig& cfg, std::span<const Observer> observers = {});

}  // namespace mcgpc
