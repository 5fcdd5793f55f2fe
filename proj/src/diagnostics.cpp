#include "mcgpc/diagnostics.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcgpc/errors.hpp"

namespace mcgpc {

std::size_t Axis::locate(double value, bool& clamped) const {
  clamped = false;
  const double rel = (value - min) / width();
  if (!(rel >= 0.0)) {
    clamped = value < min || !std::isfinite(value);
    return 0;
  }
  const auto k = static_cast<std::size_t>(std::floor(rel));
  if (k >= bins) {
    clamped = value > max;
    return bins - 1;
  }
  return k;
}

std::string_view to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::Position:
      return "position";
    case DensityKind::Velocity:
      return "velocity";
    case DensityKind::PhaseSpace:
      return "phase_space";
  }
  return "unknown";
}

double DensityGrid::cell_volume() const {
  double vol = 1.0;
  for (const auto& a : axes) vol *= a.width();
  return vol;
}

DensityGrid reconstruct_expected_density(const GpcEnsemble& ens, std::vector<Axis> axes,
                                         DensityKind kind) {
  if (ens.size() == 0) throw ConfigError("cannot reconstruct a density from an empty ensemble");
  const std::size_t expected_axes = kind == DensityKind::PhaseSpace ? 2 : static_cast<std::size_t>(ens.dim());
  if (kind == DensityKind::PhaseSpace && ens.dim() != 1) {
    throw ConfigError("phase-space density is only defined for one spatial dimension");
  }
  if (axes.size() != expected_axes) throw DimensionError("density axes do not match the ensemble dimension");
  for (const auto& a : axes) {
    if (a.bins == 0 || !(a.max > a.min)) throw ConfigError("density axis needs bins > 0 and max > min");
  }

  DensityGrid grid;
  grid.axes = std::move(axes);
  grid.kind = kind;
  std::size_t cells = 1;
  for (const auto& a : grid.axes) cells *= a.bins;
  std::vector<std::size_t> counts(cells, 0);

  for (std::size_t i = 0; i < ens.size(); ++i) {
    double coords[2] = {0.0, 0.0};
    switch (kind) {
      case DensityKind::Position:
        for (int c = 0; c < ens.dim(); ++c) coords[c] = ens.x(i, c)[0];
        break;
      case DensityKind::Velocity:
        for (int c = 0; c < ens.dim(); ++c) coords[c] = ens.v(i, c)[0];
        break;
      case DensityKind::PhaseSpace:
        coords[0] = ens.x(i, 0)[0];
        coords[1] = ens.v(i, 0)[0];
        break;
    }
    std::size_t index = 0;
    bool spilled = false;
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      bool clamped = false;
      index = index * grid.axes[a].bins + grid.axes[a].locate(coords[a], clamped);
      spilled = spilled || clamped;
    }
    ++counts[index];
    if (spilled) ++grid.spill;
  }

  const double norm = 1.0 / (static_cast<double>(ens.size()) * grid.cell_volume());
  grid.values.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) grid.values[k] = static_cast<double>(counts[k]) * norm;
  grid.total_mass = std::accumulate(grid.values.begin(), grid.values.end(), 0.0) * grid.cell_volume();
  return grid;
}

VelocityField velocity_field(const GpcEnsemble& ens, const Axis& x_axis, const Axis& y_axis,
                             Orientation filter) {
  if (ens.dim() != 2) throw ConfigError("velocity field needs a two-dimensional ensemble");
  VelocityField field;
  field.x_axis = x_axis;
  field.y_axis = y_axis;
  const std::size_t cells = x_axis.bins * y_axis.bins;
  field.mean_vx.assign(cells, 0.0);
  field.mean_vy.assign(cells, 0.0);
  field.counts.assign(cells, 0);

  VecD centre{0.0, 0.0};
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const VecD x = ens.expected_x(i);
    centre[0] += x[0];
    centre[1] += x[1];
  }
  centre[0] /= static_cast<double>(ens.size());
  centre[1] /= static_cast<double>(ens.size());

  for (std::size_t i = 0; i < ens.size(); ++i) {
    const VecD x = ens.expected_x(i);
    const VecD v = ens.expected_v(i);
    const double cross = (x[0] - centre[0]) * v[1] - (x[1] - centre[1]) * v[0];
    if (filter == Orientation::Counterclockwise && !(cross > 0.0)) continue;
    if (filter == Orientation::Clockwise && !(cross < 0.0)) continue;
    bool clamped = false;
    const std::size_t k = x_axis.locate(x[0], clamped) * y_axis.bins + y_axis.locate(x[1], clamped);
    field.mean_vx[k] += v[0];
    field.mean_vy[k] += v[1];
    ++field.counts[k];
  }
  for (std::size_t k = 0; k < cells; ++k) {
    if (field.counts[k] > 0) {
      field.mean_vx[k] /= static_cast<double>(field.counts[k]);
      field.mean_vy[k] /= static_cast<double>(field.counts[k]);
    }
  }
  return field;
}

namespace {

// Velocities (or positions) of every particle at node q, [particle][component].
void node_values(const GpcEnsemble& ens, const ModalQuadrature& quad, std::size_t q, bool velocity,
                 std::vector<double>& out) {
  const auto d = static_cast<std::size_t>(ens.dim());
  out.resize(ens.size() * d);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const auto coeffs = velocity ? ens.v(i, static_cast<int>(c)) : ens.x(i, static_cast<int>(c));
      out[i * d + c] = quad.reconstruct(coeffs, q);
    }
  }
}

double centered_sum_sq(std::span<const double> points, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = points.size() / d;
  double total = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += points[i * d + c];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = points[i * d + c] - mean;
      total += z * z;
    }
  }
  return total;
}

}  // namespace

std::vector<double> temperature_at_nodes(const GpcEnsemble& ens, const ModalQuadrature& quad) {
  if (ens.modes() != quad.modes()) throw DimensionError("ensemble and basis mode counts differ");
  std::vector<double> out(quad.nodes());
  std::vector<double> vals;
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    node_values(ens, quad, q, true, vals);
    out[q] = centered_sum_sq(vals, ens.dim()) / static_cast<double>(ens.size());
  }
  return out;
}

double expected_temperature(const GpcEnsemble& ens, const ModalQuadrature& quad) {
  const auto per_node = temperature_at_nodes(ens, quad);
  double t = 0.0;
  for (std::size_t q = 0; q < quad.nodes(); ++q) t += quad.weight(q) * per_node[q];
  return t;
}

MeanVariance observable_uq(std::span<const double> per_node_values, const ModalQuadrature& quad) {
  std::vector<double> coeffs(quad.modes());
  quad.project(per_node_values, coeffs);
  return quad.mean_variance(coeffs);
}

double pairwise_spread_direct(std::span<const double> points, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = points.size() / d;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t c = 0; c < d; ++c) {
        const double z = points[i * d + c] - points[j * d + c];
        total += z * z;
      }
    }
  }
  return 0.5 * total;
}

double pairwise_spread_centered(std::span<const double> points, int dim) {
  const std::size_t n = points.size() / static_cast<std::size_t>(dim);
  return static_cast<double>(n) * centered_sum_sq(points, dim);
}

Spreads flocking_spreads(const GpcEnsemble& ens, const ModalQuadrature& quad) {
  if (ens.size() < 2) throw ConfigError("flocking spreads need at least two particles");
  if (ens.modes() != quad.modes()) throw DimensionError("ensemble and basis mode counts differ");
  Spreads out;
  out.Gamma.resize(quad.nodes());
  out.Lambda.resize(quad.nodes());
  const bool direct = ens.size() <= kDirectSpreadLimit;
  std::vector<double> vals;
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    node_values(ens, quad, q, false, vals);
    out.Gamma[q] = direct ? pairwise_spread_direct(vals, ens.dim()) : pairwise_spread_centered(vals, ens.dim());
    node_values(ens, quad, q, true, vals);
    out.Lambda[q] = direct ? pairwise_spread_direct(vals, ens.dim()) : pairwise_spread_centered(vals, ens.dim());
  }
  return out;
}

double convergence_error(double quantity, double reference, ErrorMode mode) {
  const double abs_err = std::abs(quantity - reference);
  if (mode == ErrorMode::Absolute) return abs_err;
  if (reference == 0.0) throw ConfigError("relative error needs a non-zero reference");
  return abs_err / std::abs(reference);
}

namespace {

VecD velocity_at(const GpcEnsemble& ens, std::size_t i, std::span<const double> phi) {
  VecD v{0.0, 0.0};
  for (int c = 0; c < ens.dim(); ++c) {
    const auto coeffs = ens.v(i, c);
    for (std::size_t m = 0; m < coeffs.size(); ++m) v[c] += coeffs[m] * phi[m];
  }
  return v;
}

VecD position_at(const GpcEnsemble& ens, std::size_t i, std::span<const double> phi) {
  VecD x{0.0, 0.0};
  for (int c = 0; c < ens.dim(); ++c) {
    const auto coeffs = ens.x(i, c);
    for (std::size_t m = 0; m < coeffs.size(); ++m) x[c] += coeffs[m] * phi[m];
  }
  return x;
}

}  // namespace

SpeedStats speed_stats(const GpcEnsemble& ens, std::span<const double> phi_ref) {
  if (phi_ref.size() != ens.modes()) throw DimensionError("reference basis values have wrong length");
  SpeedStats s;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const VecD v = velocity_at(ens, i, phi_ref);
    const double speed = std::hypot(v[0], v[1]);
    sum += speed;
    sum_sq += speed * speed;
  }
  const auto n = static_cast<double>(ens.size());
  s.mean = sum / n;
  s.std = std::sqrt(std::max(0.0, sum_sq / n - s.mean * s.mean));
  return s;
}

std::pair<double, double> orientation_split(const GpcEnsemble& ens, std::span<const double> phi_ref) {
  if (phi_ref.size() != ens.modes()) throw DimensionError("reference basis values have wrong length");
  if (ens.dim() != 2) return {0.5, 0.5};
  VecD centre{0.0, 0.0};
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const VecD x = position_at(ens, i, phi_ref);
    centre[0] += x[0];
    centre[1] += x[1];
  }
  centre[0] /= static_cast<double>(ens.size());
  centre[1] /= static_cast<double>(ens.size());
  double ccw = 0.0;
  double cw = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const VecD x = position_at(ens, i, phi_ref);
    const VecD v = velocity_at(ens, i, phi_ref);
    const double cross = (x[0] - centre[0]) * v[1] - (x[1] - centre[1]) * v[0];
    if (cross > 0.0) {
      ccw += 1.0;
    } else if (cross < 0.0) {
      cw += 1.0;
    } else {
      ccw += 0.5;
      cw += 0.5;
    }
  }
  const auto n = static_cast<double>(ens.size());
  return {ccw / n, cw / n};
}

StatRecord compute_stats(const GpcEnsemble& ens, const ModalQuadrature& quad,
                         std::span<const double> phi_ref, const Spreads* spreads) {
  StatRecord r;
  r.time = ens.time();
  r.expected_temperature = expected_temperature(ens, quad);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const VecD v = ens.expected_v(i);
    r.mean_velocity[0] += v[0];
    r.mean_velocity[1] += v[1];
  }
  r.mean_velocity[0] /= static_cast<double>(ens.size());
  r.mean_velocity[1] /= static_cast<double>(ens.size());
  if (ens.size() >= 2) {
    const Spreads s = spreads ? *spreads : flocking_spreads(ens, quad);
    for (std::size_t q = 0; q < quad.nodes(); ++q) {
      r.Gamma += quad.weight(q) * s.Gamma[q];
      r.Lambda += quad.weight(q) * s.Lambda[q];
    }
  }
  const SpeedStats sp = speed_stats(ens, phi_ref);
  r.speed_mean = sp.mean;
  r.speed_std = sp.std;
  std::tie(r.ccw_fraction, r.cw_fraction) = orientation_split(ens, phi_ref);
  return r;
}

void write_stats_csv(const std::filesystem::path& path, std::span<const StatRecord> records) {
  auto out = fmt::output_file(path.string());
  out.print("t,temperature,mean_vx,mean_vy,Lambda,Gamma,speed_mean,speed_std,ccw_frac\n");
  for (const auto& r : records) {
    out.print("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.time,
              r.expected_temperature, r.mean_velocity[0], r.mean_velocity[1], r.Lambda, r.Gamma,
              r.speed_mean, r.speed_std, r.ccw_fraction);
  }
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid) {
  auto out = fmt::output_file(path.string());
  out.print("# kind={}\n# axis,min,max,bins\n", to_string(grid.kind));
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    out.print("# {},{:.17g},{:.17g},{}\n", a, grid.axes[a].min, grid.axes[a].max, grid.axes[a].bins);
  }
  out.print("# total_mass={:.17g} spill={}\n", grid.total_mass, grid.spill);
  const std::size_t cols = grid.axes.size() > 1 ? grid.axes[1].bins : 1;
  const std::size_t rows = grid.axes[0].bins;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c > 0) out.print(",");
      out.print("{:.17g}", grid.values[r * cols + c]);
    }
    out.print("\n");
  }
}

void write_density_pgm(const std::filesystem::path& path, const DensityGrid& grid) {
  if (grid.axes.size() != 2) throw ConfigError("PGM output needs a two-axis density grid");
  const std::size_t width = grid.axes[0].bins;
  const std::size_t height = grid.axes[1].bins;
  const double peak = *std::max_element(grid.values.begin(), grid.values.end());
  auto out = fmt::output_file(path.string());
  out.print("P2\n{} {}\n255\n", width, height);
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t i1 = height - 1 - row;
    for (std::size_t i0 = 0; i0 < width; ++i0) {
      const double v = grid.values[i0 * height + i1];
      const long pixel = peak > 0.0 ? std::lround(255.0 * v / peak) : 0;
      if (i0 > 0) out.print(" ");
      out.print("{}", pixel);
    }
    out.print("\n");
  }
}

void write_velocity_field_csv(const std::filesystem::path& path, const VelocityField& field) {
  auto out = fmt::output_file(path.string());
  out.print("x,y,mean_vx,mean_vy,count\n");
  for (std::size_t a = 0; a < field.x_axis.bins; ++a) {
    for (std::size_t b = 0; b < field.y_axis.bins; ++b) {
      const std::size_t k = a * field.y_axis.bins + b;
      out.print("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", field.x_axis.center(a), field.y_axis.center(b),
                field.mean_vx[k], field.mean_vy[k], field.counts[k]);
    }
  }
}

}  // namespace mcgpc
