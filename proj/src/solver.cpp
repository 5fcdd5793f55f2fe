#include "mcgpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcgpc/errors.hpp"
#include "mcgpc/random.hpp"

namespace mcgpc {

namespace {

// Partner tables larger than this many entries are regenerated on the fly.
constexpr std::size_t kMaxStoredPartners = std::size_t{1} << 26;

}  // namespace

std::size_t ModelSpec::modes() const {
  return std::visit([](const auto& b) { return b.modes(); }, uncertainty);
}

ModalQuadrature ModelSpec::quadrature() const {
  return std::visit([](const auto& b) { return ModalQuadrature(b); }, uncertainty);
}

void ModelSpec::validate() const {
  if (!alignment && !morse) throw ConfigError("model needs at least one force (alignment or morse)");
  const ModalQuadrature quad = quadrature();
  if (alignment) alignment->validate(quad);
  if (morse) morse->validate();
}

void SolverConfig::validate(std::size_t N) const {
  if (N < 1) throw ConfigError("need at least one particle");
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be finite and >= 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be finite and >= 0");
  if (t_end > 0.0 && dt == 0.0) throw ConfigError("dt must be positive when t_end > 0");
  if (S < 1 || S > N) {
    throw ConfigError("subsample size S=" + std::to_string(S) + " must satisfy 1 <= S <= N=" +
                      std::to_string(N));
  }
  if (observer_stride < 1) throw ConfigError("observer stride must be >= 1");
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  model.validate();
}

std::uint64_t SolverConfig::step_count() const {
  if (t_end <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-9));
}

Eigen::MatrixXd interaction_coeffs(const GpcEnsemble& ens, std::size_t i, std::size_t j,
                                   const CuckerSmaleParams& params, const GpcBasis& basis) {
  if (ens.modes() != basis.modes()) throw DimensionError("interaction_coeffs: mode count mismatch");
  const std::size_t m = basis.modes();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> phi(m);
  for (std::size_t q = 0; q < basis.quad_size(); ++q) {
    const double theta = basis.nodes()[q];
    double r_sq = 0.0;
    for (int c = 0; c < ens.dim(); ++c) {
      double xi = 0.0;
      double xj = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        xi += ens.x(i, c)[k] * basis.value(k, q);
        xj += ens.x(j, c)[k] * basis.value(k, q);
      }
      r_sq += (xi - xj) * (xi - xj);
    }
    const double wh = basis.weights()[q] * cs_kernel(params, theta, r_sq);
    for (std::size_t h = 0; h < m; ++h) {
      for (std::size_t k = 0; k < m; ++k) {
        e(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k)) +=
            wh * basis.value(k, q) * basis.value(h, q);
      }
    }
  }
  for (std::size_t h = 0; h < m; ++h) e.row(static_cast<Eigen::Index>(h)) /= basis.sq_norms()[h];
  return e;
}

struct McGpcSolver::Scratch {
  std::vector<double> acc;
  std::vector<double> mean;
  std::vector<std::uint32_t> partners;
  std::vector<unsigned char> marks;
};

McGpcSolver::McGpcSolver(SolverConfig cfg) : cfg_(std::move(cfg)), quad_(cfg_.model.quadrature()) {
  cfg_.model.validate();
  const std::size_t nq = quad_.nodes();
  const std::size_t m = quad_.modes();
  K_.assign(nq, 0.0);
  gamma_.assign(nq, 0.0);
  C_A_.assign(nq, 0.0);
  C_R_.assign(nq, 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    if (cfg_.model.alignment) {
      K_[q] = cfg_.model.alignment->K(quad_.theta1(q));
      gamma_[q] = cfg_.model.alignment->gamma(quad_.theta1(q));
    }
    if (cfg_.model.morse) {
      C_A_[q] = cfg_.model.morse->C_A(quad_.theta2(q));
      C_R_[q] = cfg_.model.morse->C_R(quad_.theta2(q));
    }
  }

  const auto& al = cfg_.model.alignment;
  kernel_position_free_ = al && al->gamma.is_constant() && al->gamma.c0() == 0.0;
  if (kernel_position_free_) {
    galerkin_K_.assign(m * m, 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
      const auto proj = quad_.projector(q);
      const auto phi = quad_.phi(q);
      for (std::size_t h = 0; h < m; ++h) {
        for (std::size_t k = 0; k < m; ++k) galerkin_K_[h * m + k] += proj[h] * K_[q] * phi[k];
      }
    }
  }
}

void McGpcSolver::prepare(std::size_t N, int dim) {
  if (N == N_ && dim == dim_ && !node_x_.empty()) return;
  N_ = N;
  dim_ = dim;
  const std::size_t len = N * quad_.nodes() * static_cast<std::size_t>(dim);
  node_x_.assign(len, 0.0);
  node_v_.assign(len, 0.0);
  stored_stage_ = -1;
}

std::vector<std::uint32_t> McGpcSolver::partners(std::size_t N, std::size_t i,
                                                 std::uint64_t step_index, int stage) const {
  std::vector<std::uint32_t> out(cfg_.S);
  std::vector<unsigned char> marks;
  fill_partners(N, i, step_index, stage, out, marks);
  return out;
}

void McGpcSolver::fill_partners(std::size_t N, std::size_t i, std::uint64_t step_index, int stage,
                                std::span<std::uint32_t> out,
                                std::vector<unsigned char>& marks) const {
  if (cfg_.S == N) {
    for (std::size_t j = 0; j < N; ++j) out[j] = static_cast<std::uint32_t>(j);
    return;
  }
  const std::uint64_t stage_key = cfg_.resample == ResamplePolicy::PerStage ? static_cast<std::uint64_t>(stage) : 0;
  KeyedStream rng(cfg_.seed, kTagSubsample, (step_index << 3) | stage_key, i);
  sample_without_replacement(rng, static_cast<std::uint32_t>(N), static_cast<std::uint32_t>(cfg_.S),
                             out, marks);
}

void McGpcSolver::evaluate_nodes(std::span<const double> x, std::span<const double> v) {
  const std::size_t nq = quad_.nodes();
  const std::size_t m = quad_.modes();
  const auto d = static_cast<std::size_t>(dim_);
  const auto n = static_cast<std::ptrdiff_t>(N_);
#pragma omp parallel for schedule(static) num_threads(cfg_.threads)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t q = 0; q < nq; ++q) {
      const auto phi = quad_.phi(q);
      for (std::size_t c = 0; c < d; ++c) {
        const double* xc = x.data() + (i * d + c) * m;
        const double* vc = v.data() + (i * d + c) * m;
        double xs = 0.0;
        double vs = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          xs += xc[k] * phi[k];
          vs += vc[k] * phi[k];
        }
        node_x_[(i * nq + q) * d + c] = xs;
        node_v_[(i * nq + q) * d + c] = vs;
      }
    }
  }
}

void McGpcSolver::particle_rate(std::size_t i, std::span<const double> v_coeffs,
                                std::span<const std::uint32_t> partner_list, const double* full_mean,
                                std::span<double> out, Scratch& scratch) const {
  const std::size_t nq = quad_.nodes();
  const std::size_t m = quad_.modes();
  const auto d = static_cast<std::size_t>(dim_);
  const bool generic_alignment = cfg_.model.alignment.has_value() && !kernel_position_free_;
  const bool morse = cfg_.model.morse.has_value();

  std::fill(out.begin(), out.end(), 0.0);
  auto& acc = scratch.acc;
  acc.assign(nq * d, 0.0);

  const double* xi = node_x_.data() + i * nq * d;
  const double* vi = node_v_.data() + i * nq * d;

  if (generic_alignment || morse) {
    double inv_la = 0.0, inv_lr = 0.0;
    if (morse) {
      inv_la = 1.0 / cfg_.model.morse->ell_A;
      inv_lr = 1.0 / cfg_.model.morse->ell_R;
    }
    for (const std::uint32_t j : partner_list) {
      if (j == i) continue;  // self term vanishes for alignment and is excluded for the potential
      const double* xj = node_x_.data() + static_cast<std::size_t>(j) * nq * d;
      const double* vj = node_v_.data() + static_cast<std::size_t>(j) * nq * d;
      for (std::size_t q = 0; q < nq; ++q) {
        double dx[2] = {0.0, 0.0};
        double r_sq = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          dx[c] = xi[q * d + c] - xj[q * d + c];
          r_sq += dx[c] * dx[c];
        }
        if (generic_alignment) {
          const double g = gamma_[q];
          const double h = g == 0.0 ? K_[q] : K_[q] * std::exp(-g * std::log1p(r_sq));
          for (std::size_t c = 0; c < d; ++c) acc[q * d + c] += h * (vj[q * d + c] - vi[q * d + c]);
        }
        if (morse && r_sq > 0.0) {
          const double r = std::sqrt(r_sq);
          const double du = C_A_[q] * inv_la * std::exp(-r * inv_la) - C_R_[q] * inv_lr * std::exp(-r * inv_lr);
          const double s = -du / r;
          for (std::size_t c = 0; c < d; ++c) acc[q * d + c] += s * dx[c];
        }
      }
    }
    const double inv_s = 1.0 / static_cast<double>(partner_list.size());
    for (double& a : acc) a *= inv_s;
  }

  if (morse) {
    const double a = cfg_.model.morse->a;
    const double b = cfg_.model.morse->b;
    for (std::size_t q = 0; q < nq; ++q) {
      double speed_sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) speed_sq += vi[q * d + c] * vi[q * d + c];
      const double f = a - b * speed_sq;
      for (std::size_t c = 0; c < d; ++c) acc[q * d + c] += f * vi[q * d + c];
    }
  }

  if (generic_alignment || morse) {
    for (std::size_t q = 0; q < nq; ++q) {
      const auto proj = quad_.projector(q);
      for (std::size_t c = 0; c < d; ++c) {
        const double a = acc[q * d + c];
        double* o = out.data() + c * m;
        for (std::size_t h = 0; h < m; ++h) o[h] += proj[h] * a;
      }
    }
  }

  if (kernel_position_free_) {
    // Kernel is K(theta) alone: sum_k e_hk (v_j,k - v_i,k) with one constant matrix e.
    auto& mean = scratch.mean;
    mean.assign(d * m, 0.0);
    if (full_mean != nullptr) {
      std::copy(full_mean, full_mean + d * m, mean.begin());
    } else {
      for (const std::uint32_t j : partner_list) {
        const double* vj = v_coeffs.data() + static_cast<std::size_t>(j) * d * m;
        for (std::size_t k = 0; k < d * m; ++k) mean[k] += vj[k];
      }
      const double inv_s = 1.0 / static_cast<double>(partner_list.size());
      for (double& z : mean) z *= inv_s;
    }
    const double* vi_hat = v_coeffs.data() + i * d * m;
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t h = 0; h < m; ++h) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          s += galerkin_K_[h * m + k] * (mean[c * m + k] - vi_hat[c * m + k]);
        }
        out[c * m + h] += s;
      }
    }
  }
}

void McGpcSolver::compute_rates(std::span<const double> x, std::span<const double> v,
                                std::uint64_t step_index, int stage, std::span<double> dv) {
  evaluate_nodes(x, v);

  const std::size_t N = N_;
  const std::size_t S = cfg_.S;
  const std::size_t m = quad_.modes();
  const auto d = static_cast<std::size_t>(dim_);
  const std::size_t row = d * m;
  const bool full = S == N;

  // Partner tables: reuse across the RK stages of a step unless resampling per stage.
  const int key_stage = cfg_.resample == ResamplePolicy::PerStage ? stage : 0;
  if (!full && N * S <= kMaxStoredPartners) {
    if (!partners_stored_ || stored_step_ != step_index || stored_stage_ != key_stage) {
      partner_table_.resize(N * S);
      const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel num_threads(cfg_.threads)
      {
        std::vector<unsigned char> marks;
#pragma omp for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
          const auto i = static_cast<std::size_t>(ii);
          fill_partners(N, i, step_index, key_stage, {partner_table_.data() + i * S, S}, marks);
        }
      }
      partners_stored_ = true;
      stored_step_ = step_index;
      stored_stage_ = key_stage;
    }
  } else {
    partners_stored_ = false;
  }

  std::vector<double> full_mean;
  if (kernel_position_free_ && full) {
    full_mean.assign(row, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      for (std::size_t k = 0; k < row; ++k) full_mean[k] += v[j * row + k];
    }
    for (double& z : full_mean) z /= static_cast<double>(N);
  }
  const double* mean_ptr = full_mean.empty() ? nullptr : full_mean.data();

  const auto n = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel num_threads(cfg_.threads)
  {
    Scratch scratch;
    scratch.partners.resize(S);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::span<const std::uint32_t> plist;
      if (partners_stored_) {
        plist = {partner_table_.data() + i * S, S};
      } else if (full && kernel_position_free_ && !cfg_.model.morse) {
        plist = {};  // unused: the full mean stands in for the partner sum
      } else {
        fill_partners(N, i, step_index, key_stage, scratch.partners, scratch.marks);
        plist = scratch.partners;
      }
      particle_rate(i, v, plist, mean_ptr, dv.subspan(i * row, row), scratch);
    }
  }
}

void McGpcSolver::step(GpcEnsemble& ens, std::uint64_t step_index) { step(ens, step_index, cfg_.dt); }

void McGpcSolver::step(GpcEnsemble& ens, std::uint64_t step_index, double dt) {
  if (ens.modes() != quad_.modes()) throw DimensionError("ensemble and basis mode counts differ");
  if (cfg_.S > ens.size()) throw ConfigError("subsample size exceeds particle count");
  prepare(ens.size(), ens.dim());

  auto& x = ens.x_data();
  auto& v = ens.v_data();
  const std::size_t len = x.size();

  if (cfg_.integrator == Integrator::Euler) {
    std::vector<double> dv(len);
    compute_rates(x, v, step_index, 0, dv);
    for (std::size_t k = 0; k < len; ++k) {
      x[k] += dt * v[k];
      v[k] += dt * dv[k];
    }
  } else {
    std::vector<double> k1(len), k2(len), k3(len), k4(len);
    std::vector<double> xs(len), vs(len);
    compute_rates(x, v, step_index, 0, k1);
    for (std::size_t k = 0; k < len; ++k) {
      xs[k] = x[k] + 0.5 * dt * v[k];
      vs[k] = v[k] + 0.5 * dt * k1[k];
    }
    // Position rates are the stage velocities: l1 = v, l2 = v + dt/2 k1, ...
    std::vector<double> l2 = vs;
    compute_rates(xs, vs, step_index, 1, k2);
    for (std::size_t k = 0; k < len; ++k) {
      xs[k] = x[k] + 0.5 * dt * l2[k];
      vs[k] = v[k] + 0.5 * dt * k2[k];
    }
    std::vector<double> l3 = vs;
    compute_rates(xs, vs, step_index, 2, k3);
    for (std::size_t k = 0; k < len; ++k) {
      xs[k] = x[k] + dt * l3[k];
      vs[k] = v[k] + dt * k3[k];
    }
    std::vector<double>& l4 = vs;
    compute_rates(xs, vs, step_index, 3, k4);
    for (std::size_t k = 0; k < len; ++k) {
      x[k] += dt / 6.0 * (v[k] + 2.0 * l2[k] + 2.0 * l3[k] + l4[k]);
    }
    for (std::size_t k = 0; k < len; ++k) v[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  }
  ens.set_time(ens.time() + dt);

  const std::size_t row = static_cast<std::size_t>(ens.dim()) * ens.modes();
  for (std::size_t i = 0; i < ens.size(); ++i) {
    for (std::size_t k = 0; k < row; ++k) {
      if (!std::isfinite(x[i * row + k]) || !std::isfinite(v[i * row + k])) {
        throw NumericalError("integration blow-up at particle " + std::to_string(i) + " near t=" +
                             std::to_string(ens.time()) + "; try a smaller dt");
      }
    }
  }
}

std::vector<double> McGpcSolver::velocity_rate(const GpcEnsemble& ens, std::size_t i,
                                               std::span<const std::uint32_t> partner_list) {
  if (i >= ens.size()) throw std::out_of_range("particle index out of range");
  for (const std::uint32_t j : partner_list) {
    if (j >= ens.size()) throw std::out_of_range("partner index out of range");
  }
  prepare(ens.size(), ens.dim());
  evaluate_nodes(ens.x_data(), ens.v_data());
  std::vector<double> out(static_cast<std::size_t>(ens.dim()) * ens.modes());
  Scratch scratch;
  particle_rate(i, ens.v_data(), partner_list, nullptr, out, scratch);
  return out;
}

RunResult run_from(GpcEnsemble ens, const SolverConfig& cfg, std::span<const Observer> observers) {
  cfg.validate(ens.size());
  McGpcSolver solver(cfg);
  const std::uint64_t steps = cfg.step_count();
  const double t0 = ens.time();
  auto notify = [&](std::uint64_t n) {
    for (const auto& obs : observers) obs(ens, n);
  };
  notify(0);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    // The last step is shortened when t_end is not a multiple of dt.
    const double dt = n == steps ? cfg.t_end - static_cast<double>(n - 1) * cfg.dt : cfg.dt;
    solver.step(ens, n - 1, dt);
    ens.set_time(n == steps ? t0 + cfg.t_end : t0 + static_cast<double>(n) * cfg.dt);
    if (n % cfg.observer_stride == 0 || n == steps) notify(n);
  }
  return {std::move(ens), steps};
}

RunResult run(const InitialCondition& ic, std::size_t N, const SolverConfig& cfg,
              std::span<const Observer> observers) {
  cfg.validate(N);
  GpcEnsemble ens = sample_initial(ic, N, cfg.seed, cfg.model.modes());
  return run_from(std::move(ens), cfg, observers);
}

}  // namespace mcgpc
