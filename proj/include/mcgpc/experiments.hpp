#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcgpc/diagnostics.hpp"
#include "mcgpc/ensemble.hpp"
#include "mcgpc/gpc_basis.hpp"
#include "mcgpc/models.hpp"
#include "mcgpc/pde_oracle.hpp"
#include "mcgpc/solver.hpp"

namespace mcgpc {

enum class Experiment { Homogeneous, Cs1d, Cs2d, Mill2d, Combined2dUncertainty };

std::string_view to_string(Experiment experiment);
Experiment parse_experiment(std::string_view name);

/// Random inputs: one family, or two independent ones for a tensor basis.
struct UncertaintySpec {
  PolynomialFamily family = PolynomialFamily::Legendre;
  int M = 5;
  int Q = 0;  // 0 selects 2(M+1)
  bool two_dimensional = false;
  PolynomialFamily family2 = PolynomialFamily::Legendre;
  int M2 = 0;
  int Q2 = 0;
};

struct OutputSpec {
  std::filesystem::path directory;
  Axis x_axis{-2.0, 2.0, 50};
  Axis y_axis{-2.0, 2.0, 50};
  Axis v_axis{-2.0, 2.0, 50};
  bool pgm = true;
  bool snapshot = true;
};

struct OracleSpec {
  VelocityGrid grid{-2.0, 2.0, 101};
  double dt = 0.0;  // 0 selects dv^2
  bool recompute_drift = false;
  std::size_t stride = 0;  // 0 selects about 200 output rows
};

enum class ReferenceKind { Particle, Oracle };

struct ConvergeSpec {
  ReferenceKind reference = ReferenceKind::Particle;
  std::size_t reference_N = 0;  // 0: same N as the sweep point
  int reference_M = 0;          // 0: sweep point M, or max swept M + 4 for an M sweep
  std::size_t replicates = 1;   // independent seeds averaged per sweep point
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Homogeneous;
  std::size_t N = 10000;
  InitialCondition initial;
  UncertaintySpec uncertainty;
  std::optional<CuckerSmaleParams> alignment;
  std::optional<MorseSwarmParams> morse;

  double dt = 0.01;
  double t_end = 1.0;
  std::size_t S = 10000;
  std::uint64_t seed = 1;
  Integrator integrator = Integrator::RK4;
  ResamplePolicy resample = ResamplePolicy::PerStep;
  int threads = 1;
  std::size_t observer_stride = 10;

  OutputSpec output;
  OracleSpec oracle;
  ConvergeSpec converge;

  std::string source_text;  // echoed into the manifest
  std::string origin;

  ModelSpec model() const;
  SolverConfig solver_config() const;
  /// Throws ConfigError on any inconsistency; no files are touched.
  void validate() const;
};

/// Reference parameters of each experiment; config keys override them.
ExperimentConfig experiment_defaults(Experiment experiment);

ExperimentConfig parse_experiment_config(std::string_view text, std::string origin = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& overrides);

/// Basis values at the centre of the input support (theta = 0 in every direction).
std::vector<double> basis_values_at_center(const ModelSpec& model);

/// Expected temperature at t_end of a particle run, with no artifacts.
double particle_expected_temperature(const ExperimentConfig& cfg);

struct RunSummary {
  std::vector<StatRecord> stats;
  GpcEnsemble final_state;
  std::vector<std::filesystem::path> artifacts;  // names relative to the output directory
};

/// Runs the experiment and writes stats.csv, spreads.csv, density grids,
/// the ensemble snapshot and manifest.txt into the output directory. Files are
/// staged and only moved into place after the run succeeds.
RunSummary cmd_run(const ExperimentConfig& cfg);

enum class SweepAxis { M, S, N };

struct Sweep {
  SweepAxis axis = SweepAxis::M;
  std::vector<std::size_t> values;
};

/// `M=1,2,3`, `S=10,100` or `N=1000,10000`.
Sweep parse_sweep(std::string_view text);
std::string_view to_string(SweepAxis axis);

struct ConvergeRow {
  int M = 0;
  std::size_t S = 0;
  std::size_t N = 0;
  double quantity = 0.0;   // mean expected temperature over replicates
  double reference = 0.0;  // mean reference temperature
  double abs_error = 0.0;  // |mean(quantity_r - reference_r)|
  double rel_error = 0.0;
  double std_error = 0.0;  // standard error of the mean signed difference
  std::size_t replicates = 1;
};

/// One row per sweep point, written to converge.csv in the output directory.
std::vector<ConvergeRow> cmd_converge(const ExperimentConfig& cfg, const Sweep& sweep);

struct OracleSummary {
  SgDensity solution;
  std::vector<std::pair<double, double>> temperature;  // (t, expected temperature)
};

/// Stochastic Galerkin reference for the homogeneous experiment; writes
/// oracle_density.csv, oracle_density.meta, oracle_temperature.csv and manifest.txt.
OracleSummary cmd_oracle(const ExperimentConfig& cfg);

/// Oracle solve without artifacts; `M` overrides the configured order when >= 0.
OracleSummary solve_oracle(const ExperimentConfig& cfg, int M = -1);

}  // namespace mcgpc
