#pragma once

// Probe-free, time-independent mean-field equations of the chain:
//   0 = −(κ_n + iΔ_n) c̄_n − i(g_{n−1} c̄_{n−1} + g_n c̄_{n+1}) + ε_c δ_{nN}
//       + [n = 1] i g c̄₁ λ̄ + [n = i] (−i g_a σ̄₋)
//   0 = −(γ_m + iω_m) b̄ + i g |c̄₁|²
//   0 = −(γ_a + iΔ_a) σ̄₋ + i g_a c̄_i σ̄_z
//   0 = −2(1 + σ̄_z) γ_a + 2i g_a (c̄_i* σ̄₋ + c̄_i σ̄₊)
// solved by damped fixed-point iteration on (λ̄, σ̄_z).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "omit/errors.hpp"
#include "omit/model.hpp"
#include "omit/steady_state.hpp"

namespace omit {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// λ̄ = 2 ω_m g |c₁|² / (ω_m² + γ_m²).
inline double lambda_of(cplx c_1, double g, double omega_m, double gamma_m) {
  return 2.0 * omega_m * g * std::norm(c_1) / (omega_m * omega_m + gamma_m * gamma_m);
}

/// σ̄_z = γ_a(γ_a² + Δ_a²) / (2iΔ_a g_a²|c_i|² − γ_a(γ_a² + Δ_a²)).
inline cplx sigma_z_of(cplx c_i, double g_a, double gamma_a, double delta_a) {
  const double num = gamma_a * (gamma_a * gamma_a + delta_a * delta_a);
  const cplx den = kI * (2.0 * delta_a * g_a * g_a * std::norm(c_i)) - num;
  if (den == cplx{0.0, 0.0}) {
    throw DegenerateInputError("sigma_z_of: gamma_a = 0 with vanishing drive term");
  }
  return num / den;
}

/// σ̄₋ = i g_a c̄_i σ̄_z / (γ_a + iΔ_a).
inline cplx sigma_minus_of(cplx c_i, cplx sigma_z, double g_a, double gamma_a, double delta_a) {
  if (g_a == 0.0) return {0.0, 0.0};
  const cplx den{gamma_a, delta_a};
  if (den == cplx{0.0, 0.0}) throw SingularSystemError("atomic steady state: gamma_a + i Delta_a = 0");
  return kI * g_a * c_i * sigma_z / den;
}

namespace detail {

/// Detuning of cavity 1 in the steady equations for a trial λ̄.
inline double row1_detuning(const NormalizedSystem& s, double lambda_bar) {
  return s.resolved_sideband ? s.delta_tilde_1 : s.delta.front() - s.g_single_photon * lambda_bar;
}

inline void require_invertible(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, const char* what) {
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw SingularSystemError(std::string(what) + ": matrix is singular");
}

}  // namespace detail

/// Linear chain solve for fixed (λ̄, σ̄_z). The atom enters row i through the
/// eliminated term g_a² σ̄_z / (γ_a + iΔ_a).
inline std::vector<cplx> chain_steady_linear(const NormalizedSystem& s, double lambda_bar,
                                             cplx sigma_z, double epsilon_c) {
  const int n = s.n_cavities;
  if (epsilon_c == 0.0) return std::vector<cplx>(static_cast<std::size_t>(n), cplx{0.0, 0.0});

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double det = (k == 0) ? detail::row1_detuning(s, lambda_bar) : s.delta[static_cast<std::size_t>(k)];
    a(k, k) = -cplx{s.kappa[static_cast<std::size_t>(k)], det};
  }
  for (int k = 0; k + 1 < n; ++k) {
    a(k, k + 1) = a(k + 1, k) = -kI * s.hopping[static_cast<std::size_t>(k)];
  }
  if (s.has_atom()) {
    const cplx den{s.atom->gamma_a, s.delta_a};
    if (den == cplx{0.0, 0.0}) throw SingularSystemError("chain_steady_linear: gamma_a + i Delta_a = 0");
    a(s.atom->position - 1, s.atom->position - 1) += s.atom->g_a * s.atom->g_a * sigma_z / den;
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(n - 1) = -epsilon_c;

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  detail::require_invertible(lu, "chain_steady_linear");
  Eigen::VectorXcd c = lu.solve(rhs);
  return {c.data(), c.data() + n};
}

/// Largest residual of the seven steady equations, divided by |ε_c|.
inline double steady_residual(const NormalizedSystem& s, const SteadyState& st, double epsilon_c) {
  const int n = s.n_cavities;
  const auto& c = st.c_bar;
  const double g = s.g_single_photon;
  const double delta_1 = s.resolved_sideband ? s.delta_tilde_1 + g * st.lambda_bar : s.delta.front();

  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double det = (k == 0) ? delta_1 : s.delta[uk];
    cplx r = -cplx{s.kappa[uk], det} * c[uk];
    if (k > 0) r += -kI * s.hopping[uk - 1] * c[uk - 1];
    if (k + 1 < n) r += -kI * s.hopping[uk] * c[uk + 1];
    if (k == n - 1) r += epsilon_c;
    if (k == 0) r += kI * g * c[0] * st.lambda_bar;
    if (s.has_atom() && s.atom->position == k + 1) r += -kI * s.atom->g_a * st.sigma_minus_bar;
    worst = std::max(worst, std::abs(r));
  }

  // b̄ from its own equation, then the λ̄ = b̄ + b̄* identity.
  const cplx b_bar = kI * g * std::norm(c[0]) / cplx{s.gamma_m, s.omega_m};
  worst = std::max(worst, std::abs(-cplx{s.gamma_m, s.omega_m} * b_bar + kI * g * std::norm(c[0])));
  worst = std::max(worst, std::abs(st.lambda_bar - 2.0 * b_bar.real()));

  if (s.has_atom()) {
    const auto& at = *s.atom;
    const cplx ci = c[static_cast<std::size_t>(at.position - 1)];
    const cplx sm = st.sigma_minus_bar;
    const cplx sz = st.sigma_z_bar;
    worst = std::max(worst, std::abs(-cplx{at.gamma_a, s.delta_a} * sm + kI * at.g_a * ci * sz));
    // σ₊ follows the formal adjoint of the σ₋ equation with σ_z left as is.
    const cplx adj{at.gamma_a, -s.delta_a};
    const cplx sp = adj == cplx{0.0, 0.0} ? cplx{0.0, 0.0} : -kI * at.g_a * std::conj(ci) * sz / adj;
    worst = std::max(worst, std::abs(-2.0 * (1.0 + sz) * at.gamma_a +
                                     2.0 * kI * at.g_a * (std::conj(ci) * sm + ci * sp)));
  }
  return epsilon_c == 0.0 ? worst : worst / std::abs(epsilon_c);
}

struct SteadyOptions {
  double damping = 0.5;
  double rel_tol = 1e-12;
  int max_iterations = 10000;
};

/// Fixed point of (λ̄, σ̄_z) → chain_steady_linear → (lambda_of, sigma_z_of),
/// started from the undriven values λ̄ = 0, σ̄_z = −1.
inline SteadyState solve_self_consistent(const NormalizedSystem& s, double epsilon_c,
                                         const SteadyOptions& opt = {}) {
  const double g = s.g_single_photon;
  const bool atom = s.has_atom();
  auto sz_for = [&](const std::vector<cplx>& c) -> cplx {
    if (!atom) return {-1.0, 0.0};
    return sigma_z_of(c[static_cast<std::size_t>(s.atom->position - 1)], s.atom->g_a, s.atom->gamma_a,
                      s.delta_a);
  };

  double lambda = 0.0;
  cplx sz{-1.0, 0.0};
  double change = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    std::vector<cplx> c = chain_steady_linear(s, lambda, sz, epsilon_c);
    const double lambda_new = lambda_of(c.front(), g, s.omega_m, s.gamma_m);
    const cplx sz_new = sz_for(c);

    const double lambda_scale = std::max(std::abs(lambda_new), std::numeric_limits<double>::min());
    change = std::max(std::abs(lambda_new - lambda) / lambda_scale, std::abs(sz_new - sz));
    if (change <= opt.rel_tol) {
      SteadyState st;
      st.c_bar = std::move(c);
      st.lambda_bar = lambda_of(st.c_bar.front(), g, s.omega_m, s.gamma_m);
      st.sigma_z_bar = sz_for(st.c_bar);
      if (atom) {
        st.sigma_minus_bar = sigma_minus_of(st.c_bar[static_cast<std::size_t>(s.atom->position - 1)],
                                            st.sigma_z_bar, s.atom->g_a, s.atom->gamma_a, s.delta_a);
      }
      st.iterations = it;
      st.residual_norm = steady_residual(s, st, epsilon_c);
      return st;
    }
    lambda += opt.damping * (lambda_new - lambda);
    sz += opt.damping * (sz_new - sz);
  }
  throw ConvergenceError("solve_self_consistent: no convergence after " +
                             std::to_string(opt.max_iterations) + " iterations",
                         change, opt.max_iterations);
}

/// Drive-mode convenience: uses the configured ε_c.
inline SteadyState solve_self_consistent(const PhysicalConfig& config, const SteadyOptions& opt = {}) {
  const NormalizedSystem s = normalize_rates(config);
  if (s.drive_kind != DriveKind::Drive) {
    throw PreconditionError("solve_self_consistent requires Drive mode");
  }
  return solve_self_consistent(s, s.epsilon_c, opt);
}

}  // namespace omit
