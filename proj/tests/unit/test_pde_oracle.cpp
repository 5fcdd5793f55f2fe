#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcgpc/errors.hpp"
#include "mcgpc/pde_oracle.hpp"
#include "oracles.hpp"

using namespace mcgpc;

namespace {

double initial_temperature(double mu, double sigma2) { return mu * mu + sigma2; }

}  // namespace

TEST_CASE("discretized initial density") {
  const VelocityGrid grid{-2.0, 2.0, 201};
  const auto f = discretize_bimodal(grid, 0.25, 0.1);
  double mass = 0.0, second = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    CHECK(f[j] >= 0.0);
    mass += f[j] * grid.dv();
    second += grid.point(j) * grid.point(j) * f[j] * grid.dv();
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(second == doctest::Approx(initial_temperature(0.25, 0.1)).epsilon(1e-3));
}

TEST_CASE("deterministic kernel: higher modes stay zero and temperature decays exponentially") {
  const VelocityGrid grid{-2.0, 2.0, 201};
  const GpcBasis basis(PolynomialFamily::Legendre, 3);
  const auto f0 = discretize_bimodal(grid, 0.25, 0.1);
  const double dt = grid.dv() * grid.dv();
  const auto sol = sg_homogeneous_solve(f0, 1.0, basis, grid, dt, 1.0);
  for (std::size_t h = 1; h < 4; ++h)
    for (double c : sol.mode(h)) REQUIRE(std::abs(c) < 1e-13);
  CHECK(sol.time == doctest::Approx(1.0).epsilon(1e-14));
  const double expected = initial_temperature(0.25, 0.1) * std::exp(-2.0);
  CHECK(oracle_expected_temperature(sol, basis) == doctest::Approx(expected).epsilon(0.01));
  CHECK(std::abs(sol.mass() - 1.0) < 1e-8);
}

TEST_CASE("initial temperature is reported at t = 0") {
  const VelocityGrid grid{-2.0, 2.0, 201};
  const GpcBasis basis(PolynomialFamily::Legendre, 2);
  const auto f0 = discretize_bimodal(grid, 0.25, 0.1);
  const auto sol = sg_homogeneous_solve(f0, UncertainScalar(1.0, 0.5), basis, grid, 1e-4, 0.0);
  CHECK(oracle_expected_temperature(sol, basis) == doctest::Approx(0.1625).epsilon(1e-3 / 0.1625));
}

TEST_CASE("uncertain kernel agrees with the closed-form decay") {
  const VelocityGrid grid{-2.0, 2.0, 201};
  const auto f0 = discretize_bimodal(grid, 0.25, 0.1);
  const double dt = grid.dv() * grid.dv();
  const UncertainScalar K(1.0, 0.5);
  const double exact = initial_temperature(0.25, 0.1) * oracle::uniform_decay_factor(1.0, 0.5, 1.0);
  double prev = 1.0;
  for (int M : {0, 1, 2, 4}) {
    const GpcBasis basis(PolynomialFamily::Legendre, M);
    const auto sol = sg_homogeneous_solve(f0, K, basis, grid, dt, 1.0);
    const double err = std::abs(oracle_expected_temperature(sol, basis) - exact) / exact;
    if (M >= 4) CHECK(err < 0.01);
    CHECK(err <= prev + 1e-12);
    prev = err;
    CHECK(std::abs(sol.mass() - 1.0) < 1e-8);
    // Central differences undershoot slightly in the near-empty tails.
    for (double c : sol.mode(0)) CHECK(c >= -1e-6 * 2.0);
  }
}

TEST_CASE("temperature decreases monotonically along the trajectory") {
  const VelocityGrid grid{-2.0, 2.0, 101};
  const GpcBasis basis(PolynomialFamily::Legendre, 4);
  const auto f0 = discretize_bimodal(grid, 0.25, 0.1);
  std::vector<double> temps;
  OracleOptions opt;
  opt.observer_stride = 50;
  sg_homogeneous_solve(
      f0, UncertainScalar(1.0, 0.5), basis, grid, grid.dv() * grid.dv(), 1.0,
      [&](const SgDensity& s) { temps.push_back(oracle_expected_temperature(s, basis)); }, opt);
  REQUIRE(temps.size() > 3);
  for (std::size_t k = 1; k < temps.size(); ++k) CHECK(temps[k] < temps[k - 1]);
}

TEST_CASE("oracle input checks") {
  const VelocityGrid grid{-2.0, 2.0, 101};
  const GpcBasis basis(PolynomialFamily::Legendre, 2);
  const auto f0 = discretize_bimodal(grid, 0.25, 0.1);
  const double dv2 = grid.dv() * grid.dv();
  CHECK_THROWS_AS(sg_homogeneous_solve(f0, 1.0, basis, grid, 1.01 * dv2, 1.0), ConfigError);
  CHECK_THROWS_AS(sg_homogeneous_solve(f0, 1.0, basis, grid, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(sg_homogeneous_solve(f0, UncertainScalar(0.5, 1.0), basis, grid, dv2, 1.0), ConfigError);
  auto neg = f0;
  neg[10] = -1e-3;
  CHECK_THROWS_AS(sg_homogeneous_solve(neg, 1.0, basis, grid, dv2, 1.0), ConfigError);
  auto heavy = f0;
  for (double& x : heavy) x *= 2.0;
  CHECK_THROWS_AS(sg_homogeneous_solve(heavy, 1.0, basis, grid, dv2, 1.0), ConfigError);
  CHECK_THROWS_AS(sg_homogeneous_solve(std::vector<double>(50, 0.0), 1.0, basis, grid, dv2, 1.0), DimensionError);
  CHECK_THROWS_AS((VelocityGrid{1.0, -1.0, 101}.validate()), ConfigError);
  CHECK_THROWS_AS((VelocityGrid{-1.0, 1.0, 2}.validate()), ConfigError);
}
