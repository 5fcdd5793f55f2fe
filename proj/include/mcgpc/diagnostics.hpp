#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "mcgpc/ensemble.hpp"
#include "mcgpc/gpc_basis.hpp"

namespace mcgpc {

struct Axis {
  double min = -2.0;
  double max = 2.0;
  std::size_t bins = 50;

  double width() const { return (max - min) / static_cast<double>(bins); }
  double center(std::size_t k) const { return min + (static_cast<double>(k) + 0.5) * width(); }
  /// Bin of `value`, clamped into [0, bins); `clamped` reports out-of-range input.
  std::size_t locate(double value, bool& clamped) const;
};

enum class DensityKind { Position, Velocity, PhaseSpace };

std::string_view to_string(DensityKind kind);

/// Histogram of the expected (mode-0) particle states, normalized to unit mass.
///
/// Values are stored with the first axis outermost: index = i0 * bins1 + i1.
struct DensityGrid {
  std::vector<Axis> axes;
  std::vector<double> values;
  DensityKind kind = DensityKind::Position;
  double total_mass = 0.0;
  std::size_t spill = 0;  // samples clamped into edge bins

  double cell_volume() const;
};

/// `axes` must hold d entries for position/velocity grids and two (x, v) for
/// the 1D phase-space grid.
DensityGrid reconstruct_expected_density(const GpcEnsemble& ens, std::vector<Axis> axes,
                                         DensityKind kind);

enum class Orientation { All, Counterclockwise, Clockwise };

/// Per-cell mean expected velocity on a 2D position grid (arrow plots).
struct VelocityField {
  Axis x_axis;
  Axis y_axis;
  std::vector<double> mean_vx;
  std::vector<double> mean_vy;
  std::vector<std::size_t> counts;
};

VelocityField velocity_field(const GpcEnsemble& ens, const Axis& x_axis, const Axis& y_axis,
                             Orientation filter = Orientation::All);

/// sum_q w_q (1/N) sum_i |v_i(theta_q) - u(theta_q)|^2 with u the ensemble mean at each node.
double expected_temperature(const GpcEnsemble& ens, const ModalQuadrature& quad);

/// Temperature of the ensemble at every quadrature node.
std::vector<double> temperature_at_nodes(const GpcEnsemble& ens, const ModalQuadrature& quad);

/// Mean and variance of a scalar observable known at the quadrature nodes.
MeanVariance observable_uq(std::span<const double> per_node_values, const ModalQuadrature& quad);

/// Half sum of squared pairwise distances, 0.5 * sum_{i != j} |u_i - u_j|^2,
/// for N points of dimension d stored contiguously.
double pairwise_spread_direct(std::span<const double> points, int dim);
/// Same quantity via N * sum_i |u_i - mean|^2.
double pairwise_spread_centered(std::span<const double> points, int dim);

struct Spreads {
  std::vector<double> Gamma;   // position spread per node
  std::vector<double> Lambda;  // velocity spread per node
};

/// Ensembles up to this size use the direct pairwise sum, larger ones the centered identity.
inline constexpr std::size_t kDirectSpreadLimit = 100;

Spreads flocking_spreads(const GpcEnsemble& ens, const ModalQuadrature& quad);

enum class ErrorMode { Absolute, Relative };

double convergence_error(double quantity, double reference, ErrorMode mode = ErrorMode::Absolute);

struct SpeedStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Particle speeds |v_i(theta_ref)| for basis values `phi_ref` at a chosen input.
SpeedStats speed_stats(const GpcEnsemble& ens, std::span<const double> phi_ref);

/// Fractions of particles rotating counterclockwise (x cross v > 0) and
/// clockwise about the ensemble centre; ties count half to each side.
std::pair<double, double> orientation_split(const GpcEnsemble& ens, std::span<const double> phi_ref);

struct StatRecord {
  double time = 0.0;
  double expected_temperature = 0.0;
  VecD mean_velocity{0.0, 0.0};
  double Lambda = 0.0;
  double Gamma = 0.0;
  double speed_mean = 0.0;
  double speed_std = 0.0;
  double ccw_fraction = 0.5;
  double cw_fraction = 0.5;
};

/// Expected temperature, mean velocity and node-averaged spreads use the full
/// gPC solution; speeds and orientation are evaluated at `phi_ref`. Pass
/// `spreads` to reuse node spreads that were already computed.
StatRecord compute_stats(const GpcEnsemble& ens, const ModalQuadrature& quad,
                         std::span<const double> phi_ref, const Spreads* spreads = nullptr);

void write_stats_csv(const std::filesystem::path& path, std::span<const StatRecord> records);
void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid);
/// Plain (P2) greyscale PGM of a two-axis grid: width = bins of axis 0, height =
/// bins of axis 1, top row = largest axis-1 value, maxval 255, pixel =
/// round(255 * value / max value), one image row per text line.
void write_density_pgm(const std::filesystem::path& path, const DensityGrid& grid);
void write_velocity_field_csv(const std::filesystem::path& path, const VelocityField& field);

}  // namespace mcgpc
