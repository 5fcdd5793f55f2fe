#include "mcgpc/experiments.hpp"

#include <fmt/core.h>
#include <fmt/os.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <system_error>
#include <tuple>

#include "mcgpc/config.hpp"
#include "mcgpc/errors.hpp"

#ifndef MCGPC_VERSION
#define MCGPC_VERSION "unknown"
#endif

namespace mcgpc {

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::Homogeneous: return "homogeneous";
    case Experiment::Cs1d: return "cs_1d";
    case Experiment::Cs2d: return "cs_2d";
    case Experiment::Mill2d: return "mill_2d";
    case Experiment::Combined2dUncertainty: return "combined_2d_uncertainty";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::Homogeneous, Experiment::Cs1d, Experiment::Cs2d, Experiment::Mill2d,
                       Experiment::Combined2dUncertainty}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected homogeneous, cs_1d, cs_2d, mill_2d or combined_2d_uncertainty)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::M: return "M";
    case SweepAxis::S: return "S";
    case SweepAxis::N: return "N";
  }
  return "?";
}

namespace {

MorseSwarmParams default_morse() {
  MorseSwarmParams p;
  p.a = 0.07;
  p.b = 0.05;
  p.C_A = UncertainScalar(30.0, 1.0);
  p.C_R = UncertainScalar(10.0, 1.0);
  p.ell_A = 100.0;
  p.ell_R = 3.0;
  return p;
}

bool is_2d(Experiment e) {
  return e == Experiment::Cs2d || e == Experiment::Mill2d || e == Experiment::Combined2dUncertainty;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

int as_int(const ConfigFile& file, const std::string& key, int fallback) {
  const std::int64_t v = file.get_int(key, fallback);
  if (v < -1000000 || v > 1000000) file.fail(key, "out of range");
  return static_cast<int>(v);
}

Axis read_axis(const ConfigFile& file, const std::string& prefix, Axis fallback) {
  Axis a;
  a.min = file.get_double("output." + prefix + "_min", fallback.min);
  a.max = file.get_double("output." + prefix + "_max", fallback.max);
  a.bins = file.get_size("output." + prefix + "_bins", fallback.bins);
  if (!(a.min < a.max)) file.fail("output." + prefix + "_min", "axis needs min < max");
  if (a.bins == 0) file.fail("output." + prefix + "_bins", "axis needs at least one bin");
  return a;
}

void validate_axis(const Axis& a, std::string_view name) {
  if (!(a.min < a.max) || a.bins == 0) {
    throw ConfigError("output axis " + std::string(name) + " needs min < max and bins >= 1");
  }
}

}  // namespace

ExperimentConfig experiment_defaults(Experiment experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.output.directory = std::filesystem::path("out") / std::string(to_string(experiment));
  switch (experiment) {
    case Experiment::Homogeneous:
      cfg.N = 10000;
      cfg.S = 10000;
      cfg.initial = InitialCondition::bimodal_velocity(0.25, 0.1, 0.0);
      cfg.uncertainty.M = 5;
      cfg.alignment = CuckerSmaleParams{UncertainScalar(1.0, 0.5), UncertainScalar(0.0)};
      cfg.dt = 0.01;
      cfg.t_end = 1.0;
      break;
    case Experiment::Cs1d:
      cfg.N = 1000;
      cfg.S = 5;
      cfg.initial = InitialCondition::bivariate_bimodal(1.0, 0.5, 0.2);
      cfg.uncertainty.M = 5;
      cfg.alignment = CuckerSmaleParams{UncertainScalar(1.0), UncertainScalar(0.1, 0.05)};
      cfg.dt = 0.01;
      cfg.t_end = 5.0;
      break;
    case Experiment::Cs2d:
      cfg.N = 1000;
      cfg.S = 5;
      cfg.initial = InitialCondition::annulus(0.5, 1.0, 1.0, true);
      cfg.uncertainty.M = 10;
      cfg.alignment = CuckerSmaleParams{UncertainScalar(1.0), UncertainScalar(0.1, 0.05)};
      cfg.dt = 0.01;
      cfg.t_end = 10.0;
      break;
    case Experiment::Mill2d:
      cfg.N = 2000;
      cfg.S = 10;
      cfg.initial = InitialCondition::annulus(0.5, 1.0, 1.0, true);
      cfg.uncertainty.M = 4;
      cfg.morse = default_morse();
      cfg.dt = 0.01;
      cfg.t_end = 100.0;
      cfg.observer_stride = 100;
      break;
    case Experiment::Combined2dUncertainty:
      cfg.N = 1000;
      cfg.S = 5;
      cfg.initial = InitialCondition::annulus(0.5, 1.0, 1.0, true);
      cfg.uncertainty.M = 4;
      cfg.uncertainty.two_dimensional = true;
      cfg.uncertainty.M2 = 4;
      cfg.alignment = CuckerSmaleParams{UncertainScalar(5.0), UncertainScalar(0.1, 0.05)};
      cfg.morse = default_morse();
      cfg.dt = 0.01;
      cfg.t_end = 5.0;
      break;
  }
  return cfg;
}

ModelSpec ExperimentConfig::model() const {
  ModelSpec spec;
  spec.alignment = alignment;
  spec.morse = morse;
  GpcBasis first(uncertainty.family, uncertainty.M, uncertainty.Q);
  if (uncertainty.two_dimensional) {
    spec.uncertainty = TensorBasis2D(std::move(first), GpcBasis(uncertainty.family2, uncertainty.M2, uncertainty.Q2));
  } else {
    spec.uncertainty = std::move(first);
  }
  return spec;
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig sc;
  sc.dt = dt;
  sc.t_end = t_end;
  sc.S = S;
  sc.seed = seed;
  sc.model = model();
  sc.integrator = integrator;
  sc.resample = resample;
  sc.threads = threads;
  sc.observer_stride = observer_stride;
  return sc;
}

void ExperimentConfig::validate() const {
  if (N < 2) throw ConfigError("need at least two particles (N >= 2)");
  initial.validate();
  const int dim = initial.dim();
  if (is_2d(experiment) != (dim == 2)) {
    throw ConfigError("experiment " + std::string(to_string(experiment)) + " needs " +
                      (is_2d(experiment) ? "two" : "one") + "-dimensional initial data, got " +
                      std::string(to_string(initial.kind)));
  }
  const SolverConfig sc = solver_config();  // builds the bases, so order/quadrature errors surface here
  sc.validate(N);
  switch (experiment) {
    case Experiment::Homogeneous:
      if (!alignment || morse) throw ConfigError("homogeneous experiment is pure alignment (no morse section)");
      if (!(alignment->gamma == UncertainScalar(0.0))) {
        throw ConfigError("homogeneous experiment needs gamma = 0 (position-independent kernel)");
      }
      if (uncertainty.two_dimensional) throw ConfigError("homogeneous experiment uses a single random input");
      break;
    case Experiment::Cs1d:
    case Experiment::Cs2d:
      if (!alignment || morse) throw ConfigError("Cucker-Smale experiments use alignment only");
      break;
    case Experiment::Mill2d: {
      if (!morse) throw ConfigError("mill experiment needs a morse section");
      if (!mill_regime(*morse, sc.model.quadrature(), dim)) {
        throw ConfigError("morse parameters are outside the mill regime C*ell^(2d) < 1 at some quadrature node");
      }
      break;
    }
    case Experiment::Combined2dUncertainty:
      if (!alignment || !morse) throw ConfigError("combined experiment needs alignment and morse sections");
      if (!uncertainty.two_dimensional) throw ConfigError("combined experiment needs two random inputs");
      break;
  }
  validate_axis(output.x_axis, "x");
  validate_axis(output.y_axis, "y");
  validate_axis(output.v_axis, "v");
  oracle.grid.validate();
  if (!(oracle.dt >= 0.0)) throw ConfigError("oracle dt must be >= 0");
  if (converge.replicates < 1) throw ConfigError("converge replicates must be >= 1");
  if (output.directory.empty()) throw ConfigError("output directory must not be empty");
}

ExperimentConfig parse_experiment_config(std::string_view text, std::string origin) {
  const ConfigFile file = ConfigFile::parse(text, std::move(origin));
  if (!file.has("experiment")) throw ConfigError(file.origin() + ": missing required key 'experiment'");
  Experiment kind{};
  try {
    kind = parse_experiment(file.get_string("experiment", ""));
  } catch (const ConfigError& e) {
    file.fail("experiment", e.what());
  }
  ExperimentConfig cfg = experiment_defaults(kind);
  cfg.source_text = file.text();
  cfg.origin = file.origin();

  cfg.N = file.get_size("particles.N", cfg.N);
  // S defaults to N for the homogeneous experiment, whose reference runs are full interaction.
  cfg.S = file.get_size("particles.S", kind == Experiment::Homogeneous ? cfg.N : cfg.S);
  cfg.seed = file.get_u64("particles.seed", cfg.seed);

  auto family = [&](const std::string& key, PolynomialFamily fallback) {
    try {
      return parse_family(file.get_string(key, std::string(to_string(fallback))));
    } catch (const ConfigError& e) {
      file.fail(key, e.what());
    }
  };
  UncertaintySpec& u = cfg.uncertainty;
  u.family = family("uncertainty.family", u.family);
  u.M = as_int(file, "uncertainty.M", u.M);
  u.Q = as_int(file, "uncertainty.Q", u.Q);
  u.two_dimensional = file.get_bool("uncertainty.two_dimensional", u.two_dimensional);
  u.family2 = family("uncertainty.family2", u.family2);
  u.M2 = as_int(file, "uncertainty.M2", u.two_dimensional && u.M2 == 0 ? u.M : u.M2);
  u.Q2 = as_int(file, "uncertainty.Q2", u.Q2);
  if (u.M < 0) file.fail("uncertainty.M", "order must be >= 0");
  if (u.M2 < 0) file.fail("uncertainty.M2", "order must be >= 0");

  const std::string_view var1 = u.two_dimensional ? "theta1" : "theta";
  const std::string_view var2 = u.two_dimensional ? "theta2" : "theta";
  const bool align_on = file.get_bool("alignment.enabled", cfg.alignment.has_value());
  if (align_on) {
    CuckerSmaleParams p = cfg.alignment.value_or(CuckerSmaleParams{});
    p.K = file.get_uncertain("alignment.K", p.K, var1);
    p.gamma = file.get_uncertain("alignment.gamma", p.gamma, var1);
    cfg.alignment = p;
  } else {
    cfg.alignment.reset();
  }
  const bool morse_on = file.get_bool("morse.enabled", cfg.morse.has_value());
  if (morse_on) {
    MorseSwarmParams p = cfg.morse.value_or(default_morse());
    p.a = file.get_double("morse.a", p.a);
    p.b = file.get_double("morse.b", p.b);
    p.C_A = file.get_uncertain("morse.C_A", p.C_A, var2);
    p.C_R = file.get_uncertain("morse.C_R", p.C_R, var2);
    p.ell_A = file.get_double("morse.ell_A", p.ell_A);
    p.ell_R = file.get_double("morse.ell_R", p.ell_R);
    cfg.morse = p;
  } else {
    cfg.morse.reset();
  }

  InitialCondition& ic = cfg.initial;
  if (file.has("initial.kind")) {
    const std::string k = lower(file.get_string("initial.kind", ""));
    if (k == "bimodal_velocity") {
      ic.kind = InitialKind::BimodalVelocity1D;
    } else if (k == "bivariate_bimodal") {
      ic.kind = InitialKind::BivariateBimodal1D;
    } else if (k == "annulus") {
      ic.kind = InitialKind::AnnulusRotating2D;
    } else {
      file.fail("initial.kind", "expected bimodal_velocity, bivariate_bimodal or annulus");
    }
  }
  ic.velocity_mean = file.get_double("initial.velocity_mean", ic.velocity_mean);
  ic.velocity_variance = file.get_double("initial.velocity_variance", ic.velocity_variance);
  ic.position_variance = file.get_double("initial.position_variance", ic.position_variance);
  ic.inner_radius = file.get_double("initial.inner_radius", ic.inner_radius);
  ic.outer_radius = file.get_double("initial.outer_radius", ic.outer_radius);
  ic.speed = file.get_double("initial.speed", ic.speed);
  if (file.has("initial.orientation")) {
    const std::string o = lower(file.get_string("initial.orientation", ""));
    if (o == "ccw" || o == "counterclockwise") {
      ic.counterclockwise = true;
    } else if (o == "cw" || o == "clockwise") {
      ic.counterclockwise = false;
    } else {
      file.fail("initial.orientation", "expected ccw or cw");
    }
  }

  cfg.dt = file.get_double("time.dt", cfg.dt);
  cfg.t_end = file.get_double("time.t_end", cfg.t_end);
  cfg.observer_stride = file.get_size("time.stride", cfg.observer_stride);
  if (file.has("time.integrator")) {
    const std::string s = lower(file.get_string("time.integrator", ""));
    if (s == "rk4") {
      cfg.integrator = Integrator::RK4;
    } else if (s == "euler") {
      cfg.integrator = Integrator::Euler;
    } else {
      file.fail("time.integrator", "expected rk4 or euler");
    }
  }
  if (file.has("time.resample")) {
    const std::string s = lower(file.get_string("time.resample", ""));
    if (s == "per_step") {
      cfg.resample = ResamplePolicy::PerStep;
    } else if (s == "per_stage") {
      cfg.resample = ResamplePolicy::PerStage;
    } else {
      file.fail("time.resample", "expected per_step or per_stage");
    }
  }
  cfg.threads = as_int(file, "run.threads", cfg.threads);

  cfg.output.directory = file.get_string("output.directory", cfg.output.directory.string());
  cfg.output.x_axis = read_axis(file, "x", cfg.output.x_axis);
  cfg.output.y_axis = read_axis(file, "y", cfg.output.y_axis);
  cfg.output.v_axis = read_axis(file, "v", cfg.output.v_axis);
  cfg.output.pgm = file.get_bool("output.pgm", cfg.output.pgm);
  cfg.output.snapshot = file.get_bool("output.snapshot", cfg.output.snapshot);

  cfg.oracle.grid.v_min = file.get_double("oracle.v_min", cfg.oracle.grid.v_min);
  cfg.oracle.grid.v_max = file.get_double("oracle.v_max", cfg.oracle.grid.v_max);
  cfg.oracle.grid.n_points = file.get_size("oracle.grid_points", cfg.oracle.grid.n_points);
  cfg.oracle.dt = file.get_double("oracle.dt", cfg.oracle.dt);
  cfg.oracle.recompute_drift = file.get_bool("oracle.recompute_drift", cfg.oracle.recompute_drift);
  cfg.oracle.stride = file.get_size("oracle.stride", cfg.oracle.stride);

  if (file.has("converge.reference")) {
    const std::string r = lower(file.get_string("converge.reference", ""));
    if (r == "particle") {
      cfg.converge.reference = ReferenceKind::Particle;
    } else if (r == "oracle") {
      cfg.converge.reference = ReferenceKind::Oracle;
    } else {
      file.fail("converge.reference", "expected particle or oracle");
    }
  }
  cfg.converge.reference_N = file.get_size("converge.reference_N", cfg.converge.reference_N);
  cfg.converge.reference_M = as_int(file, "converge.reference_M", cfg.converge.reference_M);
  cfg.converge.replicates = file.get_size("converge.replicates", cfg.converge.replicates);

  file.check_unused();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const ConfigFile file = ConfigFile::load(path);
  return parse_experiment_config(file.text(), path.string());
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& overrides) {
  if (overrides.out) cfg.output.directory = *overrides.out;
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.threads) cfg.threads = *overrides.threads;
  cfg.validate();
}

std::vector<double> basis_values_at_center(const ModelSpec& model) {
  if (const auto* b = std::get_if<GpcBasis>(&model.uncertainty)) return b->evaluate(0.0);
  const auto& t = std::get<TensorBasis2D>(model.uncertainty);
  const std::vector<double> p = t.first().evaluate(0.0);
  const std::vector<double> q = t.second().evaluate(0.0);
  std::vector<double> out(t.modes());
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t h = 0; h < q.size(); ++h) out[t.mode_index(k, h)] = p[k] * q[h];
  }
  return out;
}

double particle_expected_temperature(const ExperimentConfig& cfg) {
  const SolverConfig sc = cfg.solver_config();
  const RunResult res = run(cfg.initial, cfg.N, sc);
  return expected_temperature(res.final_state, sc.model.quadrature());
}

namespace {

/// Directory the artifacts are written to before being moved into place.
class StagingDir {
 public:
  explicit StagingDir(const std::filesystem::path& target) : target_(target) {
    const auto parent = target.has_parent_path() ? target.parent_path() : std::filesystem::path(".");
    std::filesystem::create_directories(parent);
    path_ = parent / ("." + target.filename().string() + ".staging-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  StagingDir(const StagingDir&) = delete;
  StagingDir& operator=(const StagingDir&) = delete;
  ~StagingDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  void commit() {
    std::filesystem::create_directories(target_);
    for (const auto& entry : std::filesystem::directory_iterator(path_)) {
      const auto dest = target_ / entry.path().filename();
      std::filesystem::remove_all(dest);
      std::filesystem::rename(entry.path(), dest);
    }
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path path_;
};

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg, std::string_view command,
                    const std::vector<std::filesystem::path>& artifacts, std::string_view extra = {}) {
  auto out = fmt::output_file(path.string());
  out.print("program=mcgpc\nversion={}\ncommand={}\nexperiment={}\nconfig={}\nseed={}\nthreads={}\n", MCGPC_VERSION,
            command, to_string(cfg.experiment), cfg.origin, cfg.seed, cfg.threads);
  out.print("N={}\nS={}\nM={}\ndt={:.17g}\nt_end={:.17g}\noutput={}\n", cfg.N, cfg.S, cfg.uncertainty.M, cfg.dt,
            cfg.t_end, cfg.output.directory.string());
  if (!extra.empty()) out.print("{}", extra);
  for (const auto& a : artifacts) out.print("artifact={}\n", a.string());
  out.print("--- config ---\n{}", cfg.source_text);
  if (!cfg.source_text.empty() && cfg.source_text.back() != '\n') out.print("\n");
}

void write_spreads(const std::filesystem::path& path, const std::vector<std::tuple<double, Spreads>>& rows,
                   const ModalQuadrature& quad) {
  auto out = fmt::output_file(path.string());
  out.print("t,node,theta1,theta2,weight,Gamma,Lambda\n");
  for (const auto& [t, s] : rows) {
    for (std::size_t q = 0; q < quad.nodes(); ++q) {
      out.print("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", t, q, quad.theta1(q), quad.theta2(q),
                quad.weight(q), s.Gamma[q], s.Lambda[q]);
    }
  }
}

void emit_state_artifacts(const ExperimentConfig& cfg, const GpcEnsemble& ens, const std::string& label,
                          const StagingDir& stage, std::vector<std::filesystem::path>& artifacts) {
  auto note = [&](const std::string& name) {
    artifacts.emplace_back(name);
    return stage / name;
  };
  const OutputSpec& o = cfg.output;
  if (ens.dim() == 1) {
    write_density_csv(note("velocity_density_" + label + ".csv"),
                      reconstruct_expected_density(ens, {o.v_axis}, DensityKind::Velocity));
    const DensityGrid phase = reconstruct_expected_density(ens, {o.x_axis, o.v_axis}, DensityKind::PhaseSpace);
    write_density_csv(note("phase_density_" + label + ".csv"), phase);
    if (o.pgm) write_density_pgm(note("phase_density_" + label + ".pgm"), phase);
  } else {
    const DensityGrid pos = reconstruct_expected_density(ens, {o.x_axis, o.y_axis}, DensityKind::Position);
    write_density_csv(note("position_density_" + label + ".csv"), pos);
    if (o.pgm) write_density_pgm(note("position_density_" + label + ".pgm"), pos);
    write_density_csv(note("velocity_density_" + label + ".csv"),
                      reconstruct_expected_density(ens, {o.v_axis, o.v_axis}, DensityKind::Velocity));
    write_velocity_field_csv(note("velocity_field_" + label + ".csv"),
                             velocity_field(ens, o.x_axis, o.y_axis, Orientation::All));
    write_velocity_field_csv(note("velocity_field_ccw_" + label + ".csv"),
                             velocity_field(ens, o.x_axis, o.y_axis, Orientation::Counterclockwise));
    write_velocity_field_csv(note("velocity_field_cw_" + label + ".csv"),
                             velocity_field(ens, o.x_axis, o.y_axis, Orientation::Clockwise));
  }
  if (o.snapshot) {
    SnapshotMeta meta;
    meta.order = cfg.uncertainty.M;
    meta.family = std::string(to_string(cfg.uncertainty.family));
    meta.seed = cfg.seed;
    write_ensemble_snapshot(ens, meta, note("ensemble_" + label + ".csv"), note("ensemble_" + label + ".meta"));
  }
}

}  // namespace

RunSummary cmd_run(const ExperimentConfig& cfg) {
  cfg.validate();
  const SolverConfig sc = cfg.solver_config();
  const ModalQuadrature quad = sc.model.quadrature();
  const std::vector<double> phi_ref = basis_values_at_center(sc.model);

  StagingDir stage(cfg.output.directory);
  RunSummary summary;
  std::vector<std::tuple<double, Spreads>> spreads;
  const std::uint64_t total_steps = sc.step_count();
  Observer observe = [&](const GpcEnsemble& ens, std::uint64_t step) {
    Spreads s = flocking_spreads(ens, quad);
    summary.stats.push_back(compute_stats(ens, quad, phi_ref, &s));
    spreads.emplace_back(ens.time(), std::move(s));
    if (step == 0) emit_state_artifacts(cfg, ens, "initial", stage, summary.artifacts);
  };
  RunResult res = run(cfg.initial, cfg.N, sc, std::span<const Observer>(&observe, 1));
  if (total_steps > 0) emit_state_artifacts(cfg, res.final_state, "final", stage, summary.artifacts);

  write_stats_csv(stage / "stats.csv", summary.stats);
  summary.artifacts.emplace_back("stats.csv");
  write_spreads(stage / "spreads.csv", spreads, quad);
  summary.artifacts.emplace_back("spreads.csv");
  write_manifest(stage / "manifest.txt", cfg, "run", summary.artifacts,
                 fmt::format("steps={}\n", res.steps));
  summary.artifacts.emplace_back("manifest.txt");
  stage.commit();
  summary.final_state = std::move(res.final_state);
  return summary;
}

Sweep parse_sweep(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("sweep must look like M=1,2,3 (got '" + std::string(text) + "')");
  std::string axis(text.substr(0, eq));
  axis.erase(std::remove_if(axis.begin(), axis.end(), [](unsigned char c) { return std::isspace(c); }), axis.end());
  Sweep sweep;
  if (axis == "M") {
    sweep.axis = SweepAxis::M;
  } else if (axis == "S") {
    sweep.axis = SweepAxis::S;
  } else if (axis == "N") {
    sweep.axis = SweepAxis::N;
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (expected M, S or N)");
  }
  for (double v : parse_number_list(text.substr(eq + 1))) {
    if (v < 0.0 || v != std::floor(v) || v > 1e12) {
      throw ConfigError("sweep values must be non-negative integers");
    }
    sweep.values.push_back(static_cast<std::size_t>(v));
  }
  if (sweep.values.empty()) throw ConfigError("sweep needs at least one value");
  return sweep;
}

OracleSummary solve_oracle(const ExperimentConfig& cfg, int M) {
  if (cfg.experiment != Experiment::Homogeneous) {
    throw ConfigError("the oracle solves the homogeneous experiment only (got " +
                      std::string(to_string(cfg.experiment)) + ")");
  }
  if (cfg.initial.kind != InitialKind::BimodalVelocity1D) {
    throw ConfigError("the oracle needs bimodal_velocity initial data");
  }
  const GpcBasis basis(cfg.uncertainty.family, M >= 0 ? M : cfg.uncertainty.M, cfg.uncertainty.Q);
  const VelocityGrid& grid = cfg.oracle.grid;
  const double dt = cfg.oracle.dt > 0.0 ? cfg.oracle.dt : grid.dv() * grid.dv();
  const std::vector<double> f0 = discretize_bimodal(grid, cfg.initial.velocity_mean, cfg.initial.velocity_variance);
  OracleOptions options;
  options.recompute_drift = cfg.oracle.recompute_drift;
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / dt - 1e-9));
  options.observer_stride = cfg.oracle.stride > 0 ? cfg.oracle.stride : std::max<std::size_t>(1, steps / 200);

  OracleSummary summary;
  const OracleObserver observer = [&](const SgDensity& s) {
    summary.temperature.emplace_back(s.time, oracle_expected_temperature(s, basis));
  };
  summary.solution = sg_homogeneous_solve(f0, cfg.alignment->K, basis, grid, dt, cfg.t_end, observer, options);
  return summary;
}

OracleSummary cmd_oracle(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != Experiment::Homogeneous) {
    throw ConfigError("oracle command needs the homogeneous experiment (got " +
                      std::string(to_string(cfg.experiment)) + ")");
  }
  StagingDir stage(cfg.output.directory);
  OracleSummary summary = solve_oracle(cfg);
  const GpcBasis basis(cfg.uncertainty.family, cfg.uncertainty.M, cfg.uncertainty.Q);
  write_sg_density(summary.solution, basis, stage / "oracle_density.csv", stage / "oracle_density.meta");
  {
    auto out = fmt::output_file((stage / "oracle_temperature.csv").string());
    out.print("t,temperature\n");
    for (const auto& [t, temp] : summary.temperature) out.print("{:.17g},{:.17g}\n", t, temp);
  }
  const std::vector<std::filesystem::path> artifacts{"oracle_density.csv", "oracle_density.meta",
                                                     "oracle_temperature.csv", "manifest.txt"};
  write_manifest(stage / "manifest.txt", cfg, "oracle", artifacts,
                 fmt::format("grid_points={}\noracle_dt={:.17g}\n", cfg.oracle.grid.n_points,
                             cfg.oracle.dt > 0.0 ? cfg.oracle.dt : cfg.oracle.grid.dv() * cfg.oracle.grid.dv()));
  stage.commit();
  return summary;
}

std::vector<ConvergeRow> cmd_converge(const ExperimentConfig& cfg, const Sweep& sweep) {
  cfg.validate();
  if (sweep.values.empty()) throw ConfigError("sweep needs at least one value");
  const ConvergeSpec& spec = cfg.converge;
  const std::size_t max_value = *std::max_element(sweep.values.begin(), sweep.values.end());

  int ref_M = spec.reference_M;
  if (sweep.axis == SweepAxis::M) {
    if (ref_M == 0) ref_M = static_cast<int>(max_value) + 4;
    if (ref_M <= static_cast<int>(max_value)) {
      throw ConfigError("converge reference_M=" + std::to_string(ref_M) + " must exceed the largest swept M=" +
                        std::to_string(max_value));
    }
  }
  if (spec.reference == ReferenceKind::Oracle && cfg.experiment != Experiment::Homogeneous) {
    throw ConfigError("oracle reference needs the homogeneous experiment");
  }
  // Validate every sweep point before any work starts.
  std::vector<ExperimentConfig> points;
  for (std::size_t value : sweep.values) {
    ExperimentConfig p = cfg;
    switch (sweep.axis) {
      case SweepAxis::M: p.uncertainty.M = static_cast<int>(value); break;
      case SweepAxis::S: p.S = value; break;
      case SweepAxis::N:
        p.N = value;
        p.S = std::min(p.S, p.N);
        break;
    }
    try {
      p.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("sweep point " + std::string(to_string(sweep.axis)) + "=" + std::to_string(value) + ": " +
                        e.what());
    }
    points.push_back(std::move(p));
  }

  StagingDir stage(cfg.output.directory);
  std::map<std::tuple<std::size_t, int, std::uint64_t>, double> particle_refs;
  std::map<int, double> oracle_refs;
  auto reference_for = [&](const ExperimentConfig& p) {
    const int M = ref_M > 0 ? ref_M : p.uncertainty.M;
    if (spec.reference == ReferenceKind::Oracle) {
      auto it = oracle_refs.find(M);
      if (it == oracle_refs.end()) {
        it = oracle_refs.emplace(M, solve_oracle(p, M).temperature.back().second).first;
      }
      return it->second;
    }
    ExperimentConfig r = p;
    r.N = spec.reference_N > 0 ? spec.reference_N : p.N;
    r.S = r.N;
    r.uncertainty.M = M;
    const auto key = std::make_tuple(r.N, M, r.seed);
    auto it = particle_refs.find(key);
    if (it == particle_refs.end()) it = particle_refs.emplace(key, particle_expected_temperature(r)).first;
    return it->second;
  };

  std::vector<ConvergeRow> rows;
  for (const ExperimentConfig& base : points) {
    ConvergeRow row;
    row.M = base.uncertainty.M;
    row.S = base.S;
    row.N = base.N;
    row.replicates = spec.replicates;
    double sum_q = 0.0, sum_ref = 0.0, sum_d = 0.0, sum_d2 = 0.0;
    for (std::size_t r = 0; r < spec.replicates; ++r) {
      ExperimentConfig p = base;
      p.seed = base.seed + r;
      const double q = particle_expected_temperature(p);
      const double ref = reference_for(p);
      sum_q += q;
      sum_ref += ref;
      sum_d += q - ref;
      sum_d2 += (q - ref) * (q - ref);
    }
    const auto R = static_cast<double>(spec.replicates);
    row.quantity = sum_q / R;
    row.reference = sum_ref / R;
    const double mean_d = sum_d / R;
    row.abs_error = std::abs(mean_d);
    row.rel_error = row.reference != 0.0 ? row.abs_error / std::abs(row.reference) : 0.0;
    row.std_error = spec.replicates > 1 ? std::sqrt(std::max(0.0, (sum_d2 - R * mean_d * mean_d) / (R - 1.0)) / R)
                                        : 0.0;
    rows.push_back(row);
  }

  {
    auto out = fmt::output_file((stage / "converge.csv").string());
    out.print("axis,M,S,N,inv_S_minus_inv_N,temperature,reference,abs_error,rel_error,std_error,replicates\n");
    for (const auto& r : rows) {
      const double gap = 1.0 / static_cast<double>(r.S) - 1.0 / static_cast<double>(r.N);
      out.print("{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", to_string(sweep.axis), r.M, r.S,
                r.N, gap, r.quantity, r.reference, r.abs_error, r.rel_error, r.std_error, r.replicates);
    }
  }
  std::string extra = fmt::format("sweep_axis={}\nreference={}\nreference_M={}\nreference_N={}\nreplicates={}\n",
                                  to_string(sweep.axis),
                                  spec.reference == ReferenceKind::Oracle ? "oracle" : "particle", ref_M,
                                  spec.reference_N, spec.replicates);
  write_manifest(stage / "manifest.txt", cfg, "converge", {"converge.csv", "manifest.txt"}, extra);
  stage.commit();
  return rows;
}

}  // namespace mcgpc
