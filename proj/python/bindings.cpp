#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mcgpc/config.hpp"
#include "mcgpc/errors.hpp"
#include "mcgpc/experiments.hpp"

namespace py = pybind11;
using namespace mcgpc;

namespace {

py::array_t<double> to_array(const std::vector<double>& values) {
  py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

// [particle][component][mode] coefficients as an (N, d, M+1) array.
py::array_t<double> coefficients(const GpcEnsemble& ens, const std::vector<double>& data) {
  py::array_t<double> out({static_cast<py::ssize_t>(ens.size()), static_cast<py::ssize_t>(ens.dim()),
                           static_cast<py::ssize_t>(ens.modes())});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

py::dict stats_dict(const std::vector<StatRecord>& stats) {
  std::vector<double> t, temp, vx, vy, lambda, gamma, speed, speed_std, ccw;
  for (const auto& r : stats) {
    t.push_back(r.time);
    temp.push_back(r.expected_temperature);
    vx.push_back(r.mean_velocity[0]);
    vy.push_back(r.mean_velocity[1]);
    lambda.push_back(r.Lambda);
    gamma.push_back(r.Gamma);
    speed.push_back(r.speed_mean);
    speed_std.push_back(r.speed_std);
    ccw.push_back(r.ccw_fraction);
  }
  py::dict d;
  d["t"] = to_array(t);
  d["temperature"] = to_array(temp);
  d["mean_vx"] = to_array(vx);
  d["mean_vy"] = to_array(vy);
  d["Lambda"] = to_array(lambda);
  d["Gamma"] = to_array(gamma);
  d["speed_mean"] = to_array(speed);
  d["speed_std"] = to_array(speed_std);
  d["ccw_fraction"] = to_array(ccw);
  return d;
}

}  // namespace

PYBIND11_MODULE(_mcgpc, m) {
  m.doc() = "MC-gPC particle solver bindings";
  m.attr("__version__") = MCGPC_VERSION;

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  (void)config_error;

  py::class_<GpcBasis>(m, "GpcBasis")
      .def(py::init([](const std::string& family, int order, int quad_points) {
             return GpcBasis(parse_family(family), order, quad_points);
           }),
           py::arg("family"), py::arg("order"), py::arg("quad_points") = 0)
      .def_property_readonly("family", [](const GpcBasis& b) { return std::string(to_string(b.family())); })
      .def_property_readonly("order", &GpcBasis::order)
      .def_property_readonly("nodes", [](const GpcBasis& b) { return to_array({b.nodes().begin(), b.nodes().end()}); })
      .def_property_readonly("weights",
                             [](const GpcBasis& b) { return to_array({b.weights().begin(), b.weights().end()}); })
      .def_property_readonly("sq_norms",
                             [](const GpcBasis& b) { return to_array({b.sq_norms().begin(), b.sq_norms().end()}); })
      .def("evaluate", [](const GpcBasis& b, double theta) { return to_array(b.evaluate(theta)); }, py::arg("theta"));

  m.def(
      "project",
      [](const std::vector<double>& samples, const GpcBasis& basis) {
        if (samples.size() != basis.quad_size()) throw DimensionError("need one sample per quadrature node");
        return to_array(project(samples, basis));
      },
      py::arg("samples_at_nodes"), py::arg("basis"), "Normalized gPC coefficients from values at the nodes.");
  m.def(
      "reconstruct_at",
      [](const std::vector<double>& coeffs, double theta, const GpcBasis& basis) {
        if (coeffs.size() != basis.modes()) throw DimensionError("need one coefficient per mode");
        return reconstruct_at(coeffs, theta, basis);
      },
      py::arg("coeffs"), py::arg("theta"), py::arg("basis"));
  m.def(
      "parse_affine",
      [](const std::string& text, const std::string& variable) {
        const UncertainScalar s = parse_affine(text, variable);
        return py::make_tuple(s.c0(), s.c1());
      },
      py::arg("text"), py::arg("variable") = "theta", "Returns (c0, c1) of `c0 + c1*variable`.");

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_property_readonly("experiment", [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); })
      .def_readwrite("N", &ExperimentConfig::N)
      .def_readwrite("S", &ExperimentConfig::S)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("t_end", &ExperimentConfig::t_end)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_property(
          "M", [](const ExperimentConfig& c) { return c.uncertainty.M; },
          [](ExperimentConfig& c, int M) { c.uncertainty.M = M; })
      .def_property(
          "output_directory", [](const ExperimentConfig& c) { return c.output.directory; },
          [](ExperimentConfig& c, const std::filesystem::path& p) { c.output.directory = p; })
      .def_property(
          "replicates", [](const ExperimentConfig& c) { return c.converge.replicates; },
          [](ExperimentConfig& c, std::size_t r) { c.converge.replicates = r; })
      .def("validate", &ExperimentConfig::validate)
      .def("expected_temperature", &particle_expected_temperature,
           py::call_guard<py::gil_scoped_release>(), "Expected temperature at t_end without writing artifacts.");

  m.def("load_config", &load_experiment_config, py::arg("path"));
  m.def("parse_config", &parse_experiment_config, py::arg("text"), py::arg("origin") = "<string>");

  m.def(
      "run",
      [](const ExperimentConfig& cfg) {
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = cmd_run(cfg);
        }
        py::dict out;
        out["stats"] = stats_dict(s.stats);
        out["x"] = coefficients(s.final_state, s.final_state.x_data());
        out["v"] = coefficients(s.final_state, s.final_state.v_data());
        py::list artifacts;
        for (const auto& a : s.artifacts) artifacts.append(a.string());
        out["artifacts"] = artifacts;
        return out;
      },
      py::arg("config"), "Runs the experiment, writes its artifacts and returns stats and final coefficients.");

  m.def(
      "oracle",
      [](const ExperimentConfig& cfg, bool write) {
        OracleSummary s;
        {
          py::gil_scoped_release release;
          s = write ? cmd_oracle(cfg) : solve_oracle(cfg);
        }
        std::vector<double> t, temp;
        for (const auto& [time, value] : s.temperature) {
          t.push_back(time);
          temp.push_back(value);
        }
        py::dict out;
        out["t"] = to_array(t);
        out["temperature"] = to_array(temp);
        py::array_t<double> coeffs({static_cast<py::ssize_t>(s.solution.modes),
                                    static_cast<py::ssize_t>(s.solution.grid.n_points)});
        std::copy(s.solution.coeffs.begin(), s.solution.coeffs.end(), coeffs.mutable_data());
        out["coeffs"] = coeffs;
        std::vector<double> v;
        for (std::size_t j = 0; j < s.solution.grid.n_points; ++j) v.push_back(s.solution.grid.point(j));
        out["v"] = to_array(v);
        return out;
      },
      py::arg("config"), py::arg("write") = false, "Stochastic Galerkin reference for the homogeneous experiment.");

  m.def(
      "converge",
      [](const ExperimentConfig& cfg, const std::string& sweep) {
        const Sweep parsed = parse_sweep(sweep);
        std::vector<ConvergeRow> rows;
        {
          py::gil_scoped_release release;
          rows = cmd_converge(cfg, parsed);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["M"] = r.M;
          d["S"] = r.S;
          d["N"] = r.N;
          d["temperature"] = r.quantity;
          d["reference"] = r.reference;
          d["abs_error"] = r.abs_error;
          d["rel_error"] = r.rel_error;
          d["std_error"] = r.std_error;
          d["replicates"] = r.replicates;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("sweep"), "Error table over a sweep such as 'M=1,2,3'; writes converge.csv.");
}
