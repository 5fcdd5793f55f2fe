#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mcgpc/diagnostics.hpp"
#include "mcgpc/errors.hpp"
#include "mcgpc/random.hpp"

using namespace mcgpc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mcgpc_diag_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

}  // namespace

TEST_CASE("histogram of a single point") {
  GpcEnsemble ens(1, 2, 1);
  ens.x(0, 0)[0] = 0.3;
  ens.x(0, 1)[0] = -0.6;
  const auto g = reconstruct_expected_density(ens, {Axis{-1, 1, 4}, Axis{-1, 1, 4}}, DensityKind::Position);
  // x in bin 2, y in bin 0.
  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    if (g.values[k] != 0.0) {
      ++nonzero;
      CHECK(k == 2 * 4 + 0);
      CHECK(g.values[k] * g.cell_volume() == doctest::Approx(1.0));
    }
  }
  CHECK(nonzero == 1);
  CHECK(g.total_mass == doctest::Approx(1.0));
  CHECK(g.spill == 0);
}

TEST_CASE("histogram of uniform samples stays within binomial bounds") {
  const std::size_t N = 20000, bins = 10;
  GpcEnsemble ens(N, 1, 1);
  KeyedStream rng(5, 99);
  for (std::size_t i = 0; i < N; ++i) ens.v(i, 0)[0] = -1.0 + 2.0 * rng.uniform();
  const auto g = reconstruct_expected_density(ens, {Axis{-1, 1, bins}}, DensityKind::Velocity);
  CHECK(g.total_mass == doctest::Approx(1.0).epsilon(1e-12));
  const double p = 1.0 / bins;
  const double sd = std::sqrt(N * p * (1 - p));
  for (double v : g.values) {
    CHECK(v >= 0.0);
    const double count = v * g.cell_volume() * N;
    CHECK(std::abs(count - N * p) < 4.5 * sd);
  }
}

TEST_CASE("out-of-range samples are clamped and counted") {
  GpcEnsemble ens(3, 1, 1);
  ens.x(0, 0)[0] = -5.0;
  ens.v(0, 0)[0] = 0.0;
  ens.x(1, 0)[0] = 5.0;
  ens.x(2, 0)[0] = 0.0;
  const auto g = reconstruct_expected_density(ens, {Axis{-1, 1, 4}, Axis{-1, 1, 4}}, DensityKind::PhaseSpace);
  CHECK(g.spill == 2);
  CHECK(g.total_mass == doctest::Approx(1.0));
  CHECK_THROWS_AS(reconstruct_expected_density(ens, {Axis{-1, 1, 4}}, DensityKind::PhaseSpace), DimensionError);
  CHECK_THROWS_AS(reconstruct_expected_density(ens, {Axis{1, -1, 4}}, DensityKind::Position), ConfigError);
}

TEST_CASE("expected temperature") {
  const GpcBasis b(PolynomialFamily::Legendre, 1);
  const ModalQuadrature quad(b);
  GpcEnsemble ens(2, 1, 2);
  // Identical particles: zero temperature even with theta dependence.
  ens.v(0, 0)[0] = 0.3;
  ens.v(0, 0)[1] = 0.7;
  ens.v(1, 0)[0] = 0.3;
  ens.v(1, 0)[1] = 0.7;
  CHECK(std::abs(expected_temperature(ens, quad)) < 1e-15);

  // v_1 = +theta, v_2 = -theta: T(theta) = theta^2, E = 1/3.
  ens.v(0, 0)[0] = 0.0;
  ens.v(1, 0)[0] = 0.0;
  ens.v(1, 0)[1] = -0.7;
  ens.v(0, 0)[1] = 0.7;
  CHECK(expected_temperature(ens, quad) == doctest::Approx(0.49 / 3.0));

  // Deterministic +-1: T = 1.
  GpcEnsemble det(2, 1, 2);
  det.v(0, 0)[0] = 1.0;
  det.v(1, 0)[0] = -1.0;
  CHECK(expected_temperature(det, quad) == doctest::Approx(1.0));
  const auto nodes = temperature_at_nodes(det, quad);
  for (double t : nodes) CHECK(t == doctest::Approx(1.0));
}

TEST_CASE("observable mean and variance") {
  const GpcBasis b(PolynomialFamily::Legendre, 3);
  const ModalQuadrature quad(b);
  std::vector<double> th(quad.nodes()), cst(quad.nodes(), 2.5), sq(quad.nodes());
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    th[q] = quad.theta1(q);
    sq[q] = th[q] * th[q];
  }
  auto mv = observable_uq(th, quad);
  CHECK(std::abs(mv.mean) < 1e-14);
  CHECK(mv.variance == doctest::Approx(1.0 / 3.0));
  mv = observable_uq(cst, quad);
  CHECK(mv.mean == doctest::Approx(2.5));
  CHECK(std::abs(mv.variance) < 1e-14);
  // theta^2: mean 1/3, variance 1/5 - 1/9.
  mv = observable_uq(sq, quad);
  CHECK(mv.mean == doctest::Approx(1.0 / 3.0));
  CHECK(mv.variance == doctest::Approx(1.0 / 5.0 - 1.0 / 9.0));
  // Shift invariance of the variance.
  std::vector<double> shifted = sq;
  for (double& s : shifted) s += 4.0;
  CHECK(observable_uq(shifted, quad).variance == doctest::Approx(mv.variance));
}

TEST_CASE("pairwise spreads") {
  const std::vector<double> two{0.0, 1.0};
  CHECK(pairwise_spread_direct(two, 1) == doctest::Approx(1.0));
  CHECK(pairwise_spread_centered(two, 1) == doctest::Approx(1.0));

  KeyedStream rng(11, 3);
  std::vector<double> pts(2 * 80);
  for (double& p : pts) p = rng.normal() * 3.0 + 10.0;
  const double a = pairwise_spread_direct(pts, 2);
  const double c = pairwise_spread_centered(pts, 2);
  CHECK(std::abs(a - c) <= 1e-9 * std::abs(a));

  const GpcBasis b(PolynomialFamily::Legendre, 1);
  const ModalQuadrature quad(b);
  GpcEnsemble ens(2, 1, 2);
  ens.v(1, 0)[0] = 1.0;
  ens.x(1, 0)[1] = 1.0;  // position difference theta
  const Spreads s = flocking_spreads(ens, quad);
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    CHECK(s.Lambda[q] == doctest::Approx(1.0));
    CHECK(s.Gamma[q] == doctest::Approx(quad.theta1(q) * quad.theta1(q)));
  }
}

TEST_CASE("spreads agree on both sides of the direct-sum threshold") {
  const GpcBasis b(PolynomialFamily::Legendre, 2);
  const ModalQuadrature quad(b);
  KeyedStream rng(1, 2);
  GpcEnsemble big(kDirectSpreadLimit + 1, 2, 3);
  for (double& x : big.x_data()) x = rng.normal();
  for (double& v : big.v_data()) v = rng.normal();
  const Spreads s = flocking_spreads(big, quad);
  for (std::size_t q = 0; q < quad.nodes(); ++q) {
    std::vector<double> px, pv;
    for (std::size_t i = 0; i < big.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        px.push_back(quad.reconstruct(big.x(i, c), q));
        pv.push_back(quad.reconstruct(big.v(i, c), q));
      }
    CHECK(s.Gamma[q] == doctest::Approx(pairwise_spread_direct(px, 2)).epsilon(1e-9));
    CHECK(s.Lambda[q] == doctest::Approx(pairwise_spread_direct(pv, 2)).epsilon(1e-9));
  }
}

TEST_CASE("convergence error") {
  CHECK(convergence_error(1.1, 1.0) == doctest::Approx(0.1));
  CHECK(convergence_error(0.9, 1.0, ErrorMode::Relative) == doctest::Approx(0.1));
  CHECK(convergence_error(-2.0, -1.0, ErrorMode::Relative) == doctest::Approx(1.0));
  CHECK(convergence_error(1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(convergence_error(1.0, 0.0, ErrorMode::Relative), ConfigError);
}

TEST_CASE("speed and orientation statistics") {
  const std::size_t N = 8;
  GpcEnsemble ens(N, 2, 1);
  for (std::size_t i = 0; i < N; ++i) {
    const double a = 2.0 * M_PI * i / N;
    ens.x(i, 0)[0] = 3.0 + std::cos(a);
    ens.x(i, 1)[0] = -1.0 + std::sin(a);
    const double sgn = i < 6 ? 1.0 : -1.0;
    ens.v(i, 0)[0] = -2.0 * sgn * std::sin(a);
    ens.v(i, 1)[0] = 2.0 * sgn * std::cos(a);
  }
  const std::vector<double> phi{1.0};
  const auto sp = speed_stats(ens, phi);
  CHECK(sp.mean == doctest::Approx(2.0));
  CHECK(sp.std < 1e-7);
  const auto [ccw, cw] = orientation_split(ens, phi);
  CHECK(ccw == doctest::Approx(0.75));
  CHECK(cw == doctest::Approx(0.25));
  CHECK_THROWS_AS(speed_stats(ens, std::vector<double>{1.0, 0.0}), DimensionError);

  const auto f = velocity_field(ens, Axis{1, 5, 2}, Axis{-3, 1, 2}, Orientation::Clockwise);
  std::size_t total = 0;
  for (auto c : f.counts) total += c;
  CHECK(total == 2);
}

TEST_CASE("file formats") {
  const fs::path dir = temp_dir("formats");
  DensityGrid g;
  g.axes = {Axis{0, 3, 3}, Axis{0, 2, 2}};
  g.kind = DensityKind::PhaseSpace;
  g.values = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};  // [i0][i1]
  g.total_mass = 15.0;
  write_density_pgm(dir / "g.pgm", g);
  const auto pgm = read_lines(dir / "g.pgm");
  REQUIRE(pgm.size() == 5);
  CHECK(pgm[0] == "P2");
  CHECK(pgm[1] == "3 2");
  CHECK(pgm[2] == "255");
  CHECK(pgm[3] == "51 153 255");  // i1 = 1, top row
  CHECK(pgm[4] == "0 102 204");

  write_density_csv(dir / "g.csv", g);
  const auto csv = read_lines(dir / "g.csv");
  REQUIRE(csv.size() == 8);
  CHECK(csv[0] == "# kind=phase_space");
  CHECK(csv[5] == "0,1");
  CHECK(csv[7] == "4,5");

  std::vector<StatRecord> recs(2);
  recs[1].time = 0.5;
  recs[1].expected_temperature = 0.25;
  write_stats_csv(dir / "s.csv", recs);
  const auto st = read_lines(dir / "s.csv");
  REQUIRE(st.size() == 3);
  CHECK(st[0] == "t,temperature,mean_vx,mean_vy,Lambda,Gamma,speed_mean,speed_std,ccw_frac");
  CHECK(st[2].rfind("0.5,0.25,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("compute_stats reuses supplied spreads") {
  const GpcBasis b(PolynomialFamily::Legendre, 1);
  const ModalQuadrature quad(b);
  GpcEnsemble ens(3, 1, 2);
  ens.v(0, 0)[0] = 1.0;
  ens.v(1, 0)[0] = -1.0;
  ens.x(2, 0)[1] = 0.5;
  const std::vector<double> phi{1.0, 0.0};
  const auto a = compute_stats(ens, quad, phi);
  const Spreads sp = flocking_spreads(ens, quad);
  const auto c = compute_stats(ens, quad, phi, &sp);
  CHECK(a.Gamma == c.Gamma);
  CHECK(a.Lambda == c.Lambda);
  CHECK(a.mean_velocity[0] == doctest::Approx(0.0));
  CHECK(a.Lambda == doctest::Approx(0.5 * 2.0 * (4.0 + 1.0 + 1.0)));
}
