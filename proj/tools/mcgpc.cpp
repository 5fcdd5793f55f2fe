#include <CLI11.hpp>
#include <fmt/core.h>

#include <exception>
#include <optional>
#include <string>

#include "mcgpc/errors.hpp"
#include "mcgpc/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("config", flags.config, "Experiment configuration file")->required();
  cmd->add_option("--out", flags.out, "Output directory (overrides output.directory)");
  cmd->add_option("--seed", flags.seed, "Master random seed");
  cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
}

mcgpc::ExperimentConfig load(const CommonFlags& flags) {
  mcgpc::ExperimentConfig cfg = mcgpc::load_experiment_config(flags.config);
  mcgpc::Overrides o;
  if (!flags.out.empty()) o.out = flags.out;
  o.seed = flags.seed;
  o.threads = flags.threads;
  mcgpc::apply_overrides(cfg, o);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo generalized polynomial chaos solver for swarming models with uncertainty"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its artifacts");
  add_common(run_cmd, run_flags);

  CommonFlags conv_flags;
  std::string sweep_text;
  auto* conv_cmd = app.add_subcommand("converge", "Expected-temperature error table over a parameter sweep");
  add_common(conv_cmd, conv_flags);
  conv_cmd->add_option("--sweep", sweep_text, "Sweep such as M=1,2,3 or S=10,100 or N=1000,10000")->required();

  CommonFlags oracle_flags;
  auto* oracle_cmd = app.add_subcommand("oracle", "Stochastic Galerkin reference for the homogeneous experiment");
  add_common(oracle_cmd, oracle_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) {
      const auto cfg = load(run_flags);
      const auto summary = mcgpc::cmd_run(cfg);
      fmt::print("wrote {} artifacts to {}\n", summary.artifacts.size(), cfg.output.directory.string());
    } else if (*conv_cmd) {
      const auto cfg = load(conv_flags);
      const auto sweep = mcgpc::parse_sweep(sweep_text);
      const auto rows = mcgpc::cmd_converge(cfg, sweep);
      for (const auto& r : rows) {
        fmt::print("M={} S={} N={} T={:.8g} ref={:.8g} err={:.4g}\n", r.M, r.S, r.N, r.quantity, r.reference,
                   r.abs_error);
      }
      fmt::print("wrote {}\n", (cfg.output.directory / "converge.csv").string());
    } else if (*oracle_cmd) {
      const auto cfg = load(oracle_flags);
      const auto summary = mcgpc::cmd_oracle(cfg);
      fmt::print("oracle expected temperature at t={:.6g}: {:.10g}\n", summary.temperature.back().first,
                 summary.temperature.back().second);
    }
  } catch (const mcgpc::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitConfig;
  } catch (const mcgpc::DimensionError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitConfig;
  } catch (const mcgpc::NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
