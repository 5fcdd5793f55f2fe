#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mcgpc/errors.hpp"
#include "mcgpc/solver.hpp"
#include "oracles.hpp"

using namespace mcgpc;

namespace {

SolverConfig cs_config(UncertainScalar K, UncertainScalar gamma, int M, std::size_t S, double dt, double t_end) {
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.S = S;
  cfg.seed = 3;
  cfg.model.alignment = CuckerSmaleParams{K, gamma};
  cfg.model.uncertainty = GpcBasis(PolynomialFamily::Legendre, M);
  return cfg;
}

}  // namespace

TEST_CASE("interaction coefficients") {
  GpcEnsemble ens(2, 1, 2);
  ens.x(1, 0)[0] = 0.7;
  const GpcBasis b(PolynomialFamily::Legendre, 1);
  auto e = interaction_coeffs(ens, 0, 1, CuckerSmaleParams{2.5, 0.0}, b);
  CHECK(e(0, 0) == doctest::Approx(2.5));
  CHECK(e(1, 1) == doctest::Approx(2.5));
  CHECK(std::abs(e(0, 1)) < 1e-14);
  CHECK(std::abs(e(1, 0)) < 1e-14);

  // Coincident positions, K = 1 + theta: e = [[1, 1/3], [1, 1]].
  GpcEnsemble same(2, 1, 2);
  e = interaction_coeffs(same, 0, 1, CuckerSmaleParams{UncertainScalar(1.0, 1.0), UncertainScalar(0.3, 0.1)}, b);
  CHECK(e(0, 0) == doctest::Approx(1.0));
  CHECK(e(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(e(1, 0) == doctest::Approx(1.0));
  CHECK(e(1, 1) == doctest::Approx(1.0));

  // Deterministic everything: H(|x_i - x_j|) times the identity.
  const GpcBasis b3(PolynomialFamily::Legendre, 3);
  GpcEnsemble det(2, 1, 4);
  det.x(1, 0)[0] = 2.0;
  e = interaction_coeffs(det, 0, 1, CuckerSmaleParams{1.5, 0.25}, b3);
  const double H = 1.5 / std::pow(5.0, 0.25);
  for (int h = 0; h < 4; ++h) {
    for (int k = 0; k < 4; ++k) CHECK(e(h, k) == doctest::Approx(h == k ? H : 0.0).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("velocity rate examples") {
  McGpcSolver solver(cs_config(UncertainScalar(1.0, 0.5), UncertainScalar(0.2, 0.1), 2, 1, 0.01, 1.0));
  GpcEnsemble ens(3, 1, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    ens.x(i, 0)[0] = 0.4 * i;
    ens.v(i, 0)[0] = 0.25;
    ens.v(i, 0)[1] = -0.1;
  }
  const std::vector<std::uint32_t> all{0, 1, 2};
  for (double r : solver.velocity_rate(ens, 0, all)) CHECK(r == 0.0);
  ens.v(1, 0)[0] = 2.0;
  for (double r : solver.velocity_rate(ens, 1, std::vector<std::uint32_t>{1})) CHECK(r == 0.0);

  // Two particles, constant kernel, partner j = 2 for i = 1.
  McGpcSolver two(cs_config(1.7, 0.0, 0, 1, 0.01, 1.0));
  GpcEnsemble pair(2, 1, 1);
  pair.v(0, 0)[0] = 0.3;
  pair.v(1, 0)[0] = -0.9;
  pair.x(1, 0)[0] = 5.0;
  const auto r = two.velocity_rate(pair, 0, std::vector<std::uint32_t>{1});
  CHECK(r[0] == doctest::Approx(1.7 * (-0.9 - 0.3)));
}

TEST_CASE("trivial steps") {
  auto cfg = cs_config(1.0, 0.0, 2, 4, 0.0, 0.0);
  McGpcSolver solver(cfg);
  GpcEnsemble ens = sample_initial(InitialCondition::bivariate_bimodal(), 4, 1, 3);
  const GpcEnsemble before = ens;
  solver.step(ens, 0, 0.0);
  CHECK(ens.x_data() == before.x_data());
  CHECK(ens.v_data() == before.v_data());

  // A single particle moves ballistically.
  auto one = cs_config(1.0, 0.3, 1, 1, 0.1, 1.0);
  McGpcSolver s1(one);
  GpcEnsemble p(1, 1, 2);
  p.v(0, 0)[0] = 0.75;
  p.x(0, 0)[0] = -1.0;
  for (int n = 0; n < 10; ++n) s1.step(p, n);
  CHECK(p.v(0, 0)[0] == 0.75);
  CHECK(p.x(0, 0)[0] == doctest::Approx(-1.0 + 0.75));
}

TEST_CASE("two-particle contraction follows the RK4 stability polynomial") {
  const double K0 = 1.3, dt = 0.05;
  McGpcSolver solver(cs_config(K0, 0.0, 0, 2, dt, 1.0));
  GpcEnsemble ens(2, 1, 1);
  ens.v(0, 0)[0] = 1.0;
  ens.v(1, 0)[0] = -0.4;
  solver.step(ens, 0);
  // With 1/N normalization the difference obeys d' = -(2 K0 / N) d = -K0 d for N = 2.
  const double z = -K0 * dt;
  const double factor = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
  CHECK((ens.v(0, 0)[0] - ens.v(1, 0)[0]) == doctest::Approx(1.4 * factor).epsilon(1e-14));
}

TEST_CASE("mean velocity modes are conserved with full interaction") {
  auto cfg = cs_config(UncertainScalar(1.0, 0.4), UncertainScalar(0.3, 0.1), 3, 50, 0.02, 1.0);
  McGpcSolver solver(cfg);
  GpcEnsemble ens = sample_initial(InitialCondition::bivariate_bimodal(), 50, 2, 4);
  auto means = [&] {
    std::vector<double> m(4, 0.0);
    for (std::size_t i = 0; i < 50; ++i)
      for (int h = 0; h < 4; ++h) m[h] += ens.v(i, 0)[h] / 50.0;
    return m;
  };
  auto prev = means();
  for (int n = 0; n < 100; ++n) {
    solver.step(ens, n);
    const auto cur = means();
    for (int h = 0; h < 4; ++h) CHECK(std::abs(cur[h] - prev[h]) <= 1e-10);
    prev = cur;
  }
}

TEST_CASE("deterministic parameters and data keep higher modes at zero") {
  SolverConfig cfg = cs_config(1.0, 0.2, 3, 5, 0.01, 0.5);
  cfg.model.morse = MorseSwarmParams{0.07, 0.05, 30.0, 10.0, 100.0, 3.0};
  const auto res = run(InitialCondition::annulus(), 40, cfg);
  for (std::size_t i = 0; i < 40; ++i)
    for (int c = 0; c < 2; ++c)
      for (std::size_t h = 1; h < 4; ++h) {
        REQUIRE(std::abs(res.final_state.x(i, c)[h]) < 1e-14);
        REQUIRE(std::abs(res.final_state.v(i, c)[h]) < 1e-14);
      }
}

TEST_CASE("partner draws are distinct, in range and reproducible") {
  McGpcSolver solver(cs_config(1.0, 0.1, 1, 6, 0.01, 1.0));
  for (std::size_t i = 0; i < 20; ++i) {
    const auto p = solver.partners(100, i, 7);
    const std::set<std::uint32_t> s(p.begin(), p.end());
    CHECK(s.size() == 6);
    CHECK(*s.rbegin() < 100);
    CHECK(p == solver.partners(100, i, 7));
  }
  CHECK(solver.partners(100, 3, 7) != solver.partners(100, 3, 8));
}

TEST_CASE("runs are bit-identical across thread counts") {
  SolverConfig cfg = cs_config(1.0, UncertainScalar(0.1, 0.05), 3, 5, 0.01, 0.3);
  cfg.threads = 1;
  const auto a = run(InitialCondition::bivariate_bimodal(), 300, cfg);
  cfg.threads = 3;
  const auto b = run(InitialCondition::bivariate_bimodal(), 300, cfg);
  CHECK(a.final_state.x_data() == b.final_state.x_data());
  CHECK(a.final_state.v_data() == b.final_state.v_data());
}

TEST_CASE("gPC solution matches direct integration at each node") {
  // Small instance: alignment with uncertain K and gamma, full interaction.
  const std::size_t N = 6;
  const double dt = 0.01;
  const int steps = 50;
  const UncertainScalar K(1.0, 0.3), gamma(0.3, 0.2);
  double prev_err = 1.0;
  for (int M : {2, 4, 6}) {
    SolverConfig cfg = cs_config(K, gamma, M, N, dt, dt * steps);
    const auto ic = InitialCondition::bivariate_bimodal();
    const auto res = run(ic, N, cfg);
    const GpcBasis basis(PolynomialFamily::Legendre, M);
    const auto init = sample_initial(ic, N, cfg.seed, 1);
    double err = 0.0;
    for (std::size_t q = 0; q < basis.quad_size(); ++q) {
      const double th = basis.nodes()[q];
      oracle::DirectSystem sys;
      sys.K = K(th);
      sys.gamma = gamma(th);
      std::vector<double> s(2 * N);
      for (std::size_t i = 0; i < N; ++i) {
        s[i] = init.x(i, 0)[0];
        s[N + i] = init.v(i, 0)[0];
      }
      s = sys.integrate(s, dt, steps);
      for (std::size_t i = 0; i < N; ++i) {
        const auto st = evaluate_at_theta(res.final_state, i, th, basis);
        err = std::max({err, std::abs(st.x[0] - s[i]), std::abs(st.v[0] - s[N + i])});
      }
    }
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-6);
}

TEST_CASE("blow-up is reported") {
  SolverConfig cfg = cs_config(1.0, 0.0, 0, 2, 1e155, 1e155);
  cfg.model.alignment.reset();
  cfg.model.morse = MorseSwarmParams{1.0, 1.0, 0.0, 0.0, 1.0, 1.0};
  GpcEnsemble ens(2, 1, 1);
  ens.v(0, 0)[0] = 1e200;
  McGpcSolver solver(cfg);
  CHECK_THROWS_AS(solver.step(ens, 0), NumericalError);
}

TEST_CASE("configuration checks") {
  SolverConfig cfg = cs_config(1.0, 0.0, 1, 10, 0.01, 1.0);
  CHECK_THROWS_AS(cfg.validate(5), ConfigError);
  cfg.S = 0;
  CHECK_THROWS_AS(cfg.validate(5), ConfigError);
  cfg.S = 2;
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(5), ConfigError);
  cfg.dt = 0.01;
  cfg.model.alignment.reset();
  CHECK_THROWS_AS(cfg.validate(5), ConfigError);
}

TEST_CASE("observers fire at the start, every stride and at the end") {
  SolverConfig cfg = cs_config(1.0, 0.0, 1, 4, 0.1, 1.05);
  cfg.observer_stride = 4;
  std::vector<std::uint64_t> seen;
  std::vector<double> times;
  const Observer obs = [&](const GpcEnsemble& e, std::uint64_t s) {
    seen.push_back(s);
    times.push_back(e.time());
  };
  const auto res = run(InitialCondition::bimodal_velocity(), 4, cfg, std::span<const Observer>(&obs, 1));
  CHECK(res.steps == 11);
  CHECK(seen == std::vector<std::uint64_t>{0, 4, 8, 11});
  CHECK(times.back() == doctest::Approx(1.05).epsilon(1e-14));

  cfg.t_end = 0.0;
  seen.clear();
  run(InitialCondition::bimodal_velocity(), 4, cfg, std::span<const Observer>(&obs, 1));
  CHECK(seen == std::vector<std::uint64_t>{0});
}
