#pragma once

// Time-domain mean-field dynamics in the frame rotating at the pump
// frequency, with the probe entering cavity N as ε_p e^{−iΔt}.
//
// Nonlinear equations (atom in cavity i, cavity 1 on the mirror):
//   ċ_n = −(κ_n + iΔ_n) c_n − i(g_{n−1} c_{n−1} + g_n c_{n+1})
//         + [n = N](ε_c + ε_p e^{−iΔt}) + [n = 1] i g c₁(b + b*) + [n = i](−i g_a σ₋)
//   ḃ   = −(γ_m + iω_m) b + i g |c₁|²
//   σ̇₋  = −(γ_a + iΔ_a) σ₋ + i g_a c_i σ_z
//   σ̇_z = −2(1 + σ_z) γ_a + 2i g_a (c_i* σ₋ + c_i σ₊)
// with σ₊ carried as its own variable obeying the formal adjoint of the σ₋
// equation (σ_z not conjugated). This is the system whose fixed point is
// sigma_z_of; σ_z stays real whenever Δ_a g_a c_i = 0. The σ₊ channel makes the
// system unstable once g_a|c_i| is comparable to Δ_a.
//
// Linearized equations for δO around the steady state:
//   δċ_n = −(κ_n + iΔ_n) δc_n − i(…) + [n = N] ε_p e^{−iΔt}
//          + [n = 1] iG(δb* + δb) + [n = i](−i g_a δσ₋),  Δ₁ → Δ̃₁
//   δḃ   = −(γ_m + iω_m) δb + i(G δc₁* + G* δc₁)
//   δσ̇₋  = −(γ_a + iΔ_a) δσ₋ + i g_a σ̄_z δc_i
// The conjugate terms are evaluated explicitly, so the state is integrated
// as a genuine 2×(real dimension) system with no rotating-wave shortcut.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "omit/errors.hpp"
#include "omit/model.hpp"
#include "omit/parallel.hpp"
#include "omit/response.hpp"
#include "omit/steady.hpp"

namespace omit {

/// Sampled trajectory. `c` is row-major: sample s, cavity n at c[s*N + n].
struct Trajectory {
  int n_cavities = 0;
  std::vector<double> t;  // µs
  std::vector<cplx> c;
  std::vector<cplx> b;
  std::vector<cplx> sigma_minus;
  std::vector<cplx> sigma_z;  // nonlinear runs only

  std::size_t size() const { return t.size(); }
  cplx cavity(std::size_t sample, int n) const {
    return c[sample * static_cast<std::size_t>(n_cavities) + static_cast<std::size_t>(n)];
  }
  std::vector<cplx> cavity_series(int n) const {
    std::vector<cplx> out(size());
    for (std::size_t s = 0; s < size(); ++s) out[s] = cavity(s, n);
    return out;
  }
};

struct IntegrationOptions {
  double t_end = 0.0;  // µs
  double dt = 0.0;     // µs; 0 selects default_time_step
  std::size_t stride = 1;
  double record_from = 0.0;  // samples with t < record_from are not stored
};

/// Full mean-field state; σ₊ is independent of σ₋ (see header comment).
struct MeanFieldState {
  std::vector<cplx> c;
  cplx b{0.0, 0.0};
  cplx sigma_minus{0.0, 0.0};
  cplx sigma_plus{0.0, 0.0};
  cplx sigma_z{-1.0, 0.0};
};

/// Largest angular rate present in the equations, including the probe detuning
/// and the Rabi frequency 2·g_a·|c̄| of a driven atom.
inline double max_rate(const NormalizedSystem& s, double big_delta) {
  double r = std::max({s.omega_m, s.gamma_m, std::abs(big_delta), std::abs(s.delta_tilde_1), std::abs(s.G)});
  for (double k : s.kappa) r = std::max(r, k);
  for (double g : s.hopping) r = std::max(r, g);
  for (double d : s.delta) r = std::max(r, std::abs(d));
  if (s.atom) r = std::max({r, s.atom->g_a, s.atom->gamma_a, std::abs(s.delta_a), 2.0 * s.atom->g_a * s.field_scale});
  return r;
}

/// 2π/(200·ω_m), tightened if another rate exceeds ω_m.
inline double default_time_step(const NormalizedSystem& s, double big_delta) {
  return kTwoPi / (200.0 * std::max(s.omega_m, max_rate(s, big_delta)));
}

/// Slowest nonzero decay among κ_n, γ_m (and γ_a when an atom is present).
inline double slowest_decay(const NormalizedSystem& s) {
  double r = std::numeric_limits<double>::infinity();
  for (double k : s.kappa) {
    if (k > 0.0) r = std::min(r, k);
  }
  if (s.gamma_m > 0.0) r = std::min(r, s.gamma_m);
  if (s.has_atom() && s.atom->gamma_a > 0.0) r = std::min(r, s.atom->gamma_a);
  return r;
}

namespace detail {

/// Classical fixed-step RK4 over a complex state vector. `rhs(t, y, dy)`
/// fills dy; `observe(step, t, y)` is called at step 0 and after each step.
template <class Rhs, class Observe>
void rk4(std::vector<cplx>& y, double dt, std::size_t steps, Rhs&& rhs, Observe&& observe) {
  const std::size_t n = y.size();
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);
  observe(std::size_t{0}, 0.0, y);
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double t_next = static_cast<double>(step + 1) * dt;
    for (const auto& v : y) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw DivergenceError("state became non-finite at t = " + std::to_string(t_next) + " us", t_next);
      }
    }
    observe(step + 1, t_next, y);
  }
}

inline std::pair<double, std::size_t> resolve_steps(const NormalizedSystem& s, double big_delta,
                                                    const IntegrationOptions& opt) {
  const double dt = opt.dt > 0.0 ? opt.dt : default_time_step(s, big_delta);
  const double limit = kTwoPi / (50.0 * max_rate(s, big_delta));
  if (dt > limit * (1.0 + 1e-12)) {
    throw ConfigurationError("time step " + std::to_string(dt) + " us exceeds 2pi/(50 max rate) = " +
                             std::to_string(limit) + " us");
  }
  if (!(opt.t_end >= 0.0)) throw ConfigurationError("t_end must be nonnegative");
  if (opt.stride == 0) throw ConfigurationError("stride must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(opt.t_end / dt - 1e-9));
  return {dt, steps};
}

}  // namespace detail

/// Integrates the nonlinear mean-field equations of a Drive-mode system.
/// Δ is the probe–pump detuning (rad/µs). Starts from `initial`, or from
/// empty cavities, b = 0 and the ground-state atom.
inline Trajectory integrate_nonlinear(const NormalizedSystem& s, double big_delta, const IntegrationOptions& opt,
                                      const std::optional<MeanFieldState>& initial = std::nullopt) {
  if (s.drive_kind != DriveKind::Drive) throw ConfigurationError("integrate_nonlinear requires Drive mode");
  const auto [dt, steps] = detail::resolve_steps(s, big_delta, opt);
  const int n = s.n_cavities;
  const auto un = static_cast<std::size_t>(n);
  const std::size_t ib = un, ism = un + 1, isp = un + 2, isz = un + 3;
  const bool atom = s.has_atom();
  const int ai = atom ? s.atom->position - 1 : 0;
  const double g = s.g_single_photon;

  std::vector<cplx> y(un + 4, cplx{0.0, 0.0});
  y[isz] = -1.0;
  if (initial) {
    if (initial->c.size() != un) throw ConfigurationError("initial state has the wrong number of cavities");
    std::copy(initial->c.begin(), initial->c.end(), y.begin());
    y[ib] = initial->b;
    y[ism] = initial->sigma_minus;
    y[isp] = initial->sigma_plus;
    y[isz] = initial->sigma_z;
  }

  auto rhs = [&](double t, const std::vector<cplx>& u, std::vector<cplx>& du) {
    const cplx probe = s.epsilon_p * std::exp(cplx{0.0, -big_delta * t});
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      cplx d = -cplx{s.kappa[uk], s.delta[uk]} * u[uk];
      if (k > 0) d += -kI * s.hopping[uk - 1] * u[uk - 1];
      if (k + 1 < n) d += -kI * s.hopping[uk] * u[uk + 1];
      if (k == n - 1) d += s.epsilon_c + probe;
      if (k == 0) d += kI * g * u[0] * (2.0 * u[ib].real());
      if (atom && k == ai) d += -kI * s.atom->g_a * u[ism];
      du[uk] = d;
    }
    du[ib] = -cplx{s.gamma_m, s.omega_m} * u[ib] + kI * g * std::norm(u[0]);
    if (atom) {
      const auto& at = *s.atom;
      const cplx ci = u[static_cast<std::size_t>(ai)];
      du[ism] = -cplx{at.gamma_a, s.delta_a} * u[ism] + kI * at.g_a * ci * u[isz];
      du[isp] = -cplx{at.gamma_a, -s.delta_a} * u[isp] - kI * at.g_a * std::conj(ci) * u[isz];
      du[isz] = -2.0 * (1.0 + u[isz]) * at.gamma_a + 2.0 * kI * at.g_a * (std::conj(ci) * u[ism] + ci * u[isp]);
    } else {
      du[ism] = du[isp] = du[isz] = 0.0;
    }
  };

  Trajectory traj;
  traj.n_cavities = n;
  auto observe = [&](std::size_t step, double t, const std::vector<cplx>& u) {
    if (step % opt.stride != 0 || t < opt.record_from) return;
    traj.t.push_back(t);
    traj.c.insert(traj.c.end(), u.begin(), u.begin() + n);
    traj.b.push_back(u[ib]);
    traj.sigma_minus.push_back(u[ism]);
    traj.sigma_z.push_back(u[isz]);
  };
  detail::rk4(y, dt, steps, rhs, observe);
  return traj;
}

/// Convenience for a Drive-mode config: resolves detunings through the
/// steady state when the resolved-sideband condition is requested.
inline Trajectory integrate_nonlinear(const PhysicalConfig& config, double big_delta, const IntegrationOptions& opt,
                                      const std::optional<MeanFieldState>& initial = std::nullopt) {
  if (!std::holds_alternative<Drive>(config.drive_mode)) {
    throw ConfigurationError("integrate_nonlinear requires Drive mode");
  }
  const NormalizedSystem s = normalize(config, solve_self_consistent(config));
  return integrate_nonlinear(s, big_delta, opt, initial);
}

/// Integrates the linearized fluctuation equations from zero fluctuations.
inline Trajectory integrate_linearized(const NormalizedSystem& s, double epsilon_p, double big_delta,
                                       const IntegrationOptions& opt) {
  const auto [dt, steps] = detail::resolve_steps(s, big_delta, opt);
  const int n = s.n_cavities;
  const auto un = static_cast<std::size_t>(n);
  const std::size_t ib = un, ism = un + 1;
  const bool atom = s.has_atom();
  const int ai = atom ? s.atom->position - 1 : 0;
  const cplx G = s.G;

  std::vector<cplx> y(un + 2, cplx{0.0, 0.0});
  auto rhs = [&](double t, const std::vector<cplx>& u, std::vector<cplx>& du) {
    const cplx probe = epsilon_p * std::exp(cplx{0.0, -big_delta * t});
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double det = (k == 0) ? s.delta_tilde_1 : s.delta[uk];
      cplx d = -cplx{s.kappa[uk], det} * u[uk];
      if (k > 0) d += -kI * s.hopping[uk - 1] * u[uk - 1];
      if (k + 1 < n) d += -kI * s.hopping[uk] * u[uk + 1];
      if (k == n - 1) d += probe;
      if (k == 0) d += kI * G * (std::conj(u[ib]) + u[ib]);
      if (atom && k == ai) d += -kI * s.atom->g_a * u[ism];
      du[uk] = d;
    }
    du[ib] = -cplx{s.gamma_m, s.omega_m} * u[ib] + kI * (G * std::conj(u[0]) + std::conj(G) * u[0]);
    if (atom) {
      const cplx ci = u[static_cast<std::size_t>(ai)];
      du[ism] = -cplx{s.atom->gamma_a, s.delta_a} * u[ism] + kI * s.atom->g_a * s.sigma_z_bar * ci;
    } else {
      du[ism] = 0.0;
    }
  };

  Trajectory traj;
  traj.n_cavities = n;
  auto observe = [&](std::size_t step, double t, const std::vector<cplx>& u) {
    if (step % opt.stride != 0 || t < opt.record_from) return;
    traj.t.push_back(t);
    traj.c.insert(traj.c.end(), u.begin(), u.begin() + n);
    traj.b.push_back(u[ib]);
    traj.sigma_minus.push_back(u[ism]);
  };
  detail::rk4(y, dt, steps, rhs, observe);
  return traj;
}

/// Lock-in projection of one sampled series onto e^{∓iΔt} over the final
/// n_periods whole periods: O₋ = (1/nT)∫(O − Ō) e^{+iΔt} dt, O₊ likewise with
/// e^{−iΔt}; Ō is the mean over the same span. Uniform sampling is assumed;
/// a window start falling between samples is handled by linear interpolation.
inline std::pair<cplx, cplx> demodulate_series(const std::vector<double>& t, const std::vector<cplx>& y,
                                               double big_delta, int n_periods) {
  if (big_delta == 0.0) throw PreconditionError("demodulate: Delta must be nonzero");
  if (n_periods < 1) throw WindowError("demodulate: n_periods must be at least 1");
  if (t.size() != y.size() || t.size() < 2) throw WindowError("demodulate: need at least two samples");
  const double span = static_cast<double>(n_periods) * kTwoPi / std::abs(big_delta);
  const double t_end = t.back();
  const double t_start = t_end - span;
  const double dt = t[1] - t[0];
  if (t_start < t.front() - 1e-9 * dt) {
    throw WindowError("demodulate: trajectory shorter than " + std::to_string(n_periods) + " periods");
  }

  std::size_t i0 = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_start - 1e-9 * dt) - t.begin());
  // Trapezoid rule; accumulate ∫y, ∫y e^{iΔt}, ∫y e^{−iΔt}, ∫e^{±iΔt}.
  cplx s0{}, sm{}, sp{}, em{}, ep{};
  auto segment = [&](double ta, cplx ya, double tb, cplx yb) {
    const double h = 0.5 * (tb - ta);
    const cplx ea = std::exp(cplx{0.0, big_delta * ta});
    const cplx eb = std::exp(cplx{0.0, big_delta * tb});
    s0 += h * (ya + yb);
    sm += h * (ya * ea + yb * eb);
    sp += h * (ya * std::conj(ea) + yb * std::conj(eb));
    em += h * (ea + eb);
    ep += h * (std::conj(ea) + std::conj(eb));
  };
  if (i0 > 0 && t[i0] > t_start + 1e-9 * dt) {
    const double w = (t_start - t[i0 - 1]) / (t[i0] - t[i0 - 1]);
    const cplx ys = y[i0 - 1] + w * (y[i0] - y[i0 - 1]);
    segment(t_start, ys, t[i0], y[i0]);
  }
  for (std::size_t i = i0; i + 1 < t.size(); ++i) segment(t[i], y[i], t[i + 1], y[i + 1]);

  const cplx mean = s0 / span;
  return {(sm - mean * em) / span, (sp - mean * ep) / span};
}

struct Sidebands {
  std::vector<cplx> c_minus, c_plus;
  cplx b_minus, b_plus;
  cplx sm_minus, sm_plus;
};

/// Demodulates every tracked variable of `traj`.
inline Sidebands demodulate(const Trajectory& traj, double big_delta, int n_periods) {
  Sidebands out;
  for (int k = 0; k < traj.n_cavities; ++k) {
    const auto [m, p] = demodulate_series(traj.t, traj.cavity_series(k), big_delta, n_periods);
    out.c_minus.push_back(m);
    out.c_plus.push_back(p);
  }
  std::tie(out.b_minus, out.b_plus) = demodulate_series(traj.t, traj.b, big_delta, n_periods);
  std::tie(out.sm_minus, out.sm_plus) = demodulate_series(traj.t, traj.sigma_minus, big_delta, n_periods);
  return out;
}

struct DemodulationPlan {
  double dt = 0.0;
  std::size_t steps = 0;
  double record_from = 0.0;
  int n_periods = 200;
};

/// Step size dividing the probe period exactly, transient 10/(slowest decay),
/// followed by n_periods whole periods for demodulation.
inline DemodulationPlan plan_demodulation(const NormalizedSystem& s, double big_delta, int n_periods = 200,
                                          std::optional<double> transient_us = std::nullopt) {
  DemodulationPlan p;
  p.n_periods = n_periods;
  const double period = kTwoPi / std::abs(big_delta);
  const double dt_req = default_time_step(s, big_delta);
  const auto per_period = static_cast<std::size_t>(std::ceil(period / dt_req));
  p.dt = period / static_cast<double>(per_period);
  const double t0 = transient_us.value_or(10.0 / slowest_decay(s));
  const auto transient_steps = static_cast<std::size_t>(std::ceil(t0 / p.dt));
  p.steps = transient_steps + static_cast<std::size_t>(n_periods) * per_period;
  p.record_from = (static_cast<double>(transient_steps) - 0.5) * p.dt;
  return p;
}

struct TimeDomainPoint {
  cplx eps_T;      // library convention
  cplx c_n_minus;  // physical
  cplx c_n_plus;
};

/// ε_T at detuning x (rad/µs) from the linearized equations and demodulation.
inline TimeDomainPoint timedomain_epsilon_T(const NormalizedSystem& s, double x, int n_periods = 200,
                                            const ResponseOptions& ropt = {}) {
  const double big_delta = s.omega_m + x;
  const double eps_p = s.epsilon_p > 0.0 ? s.epsilon_p : 1.0;
  const DemodulationPlan plan = plan_demodulation(s, big_delta, n_periods);
  IntegrationOptions opt;
  opt.dt = plan.dt;
  opt.t_end = static_cast<double>(plan.steps) * plan.dt;
  opt.record_from = plan.record_from;
  const Trajectory traj = integrate_linearized(s, eps_p, big_delta, opt);
  const auto [m, p] = demodulate_series(traj.t, traj.cavity_series(s.n_cavities - 1), big_delta, n_periods);
  return {epsilon_T_from_sideband(m, s.kappa_n(), eps_p, ropt), m, p};
}

/// Mean-field state matching a steady solution (b̄ and σ̄₊ reconstructed).
inline MeanFieldState state_from_steady(const NormalizedSystem& s, const SteadyState& st) {
  MeanFieldState m;
  m.c = st.c_bar;
  m.b = kI * s.g_single_photon * std::norm(st.c_bar.front()) / cplx{s.gamma_m, s.omega_m};
  m.sigma_minus = st.sigma_minus_bar;
  m.sigma_z = st.sigma_z_bar;
  if (s.has_atom()) {
    const cplx adj{s.atom->gamma_a, -s.delta_a};
    const cplx ci = st.c_bar[static_cast<std::size_t>(s.atom->position - 1)];
    m.sigma_plus = adj == cplx{0.0, 0.0} ? cplx{0.0, 0.0} : -kI * s.atom->g_a * std::conj(ci) * st.sigma_z_bar / adj;
  }
  return m;
}

/// ε_T at detuning x from the full nonlinear equations of a Drive-mode
/// system, started on its steady state so only the probe transient remains.
inline TimeDomainPoint timedomain_epsilon_T_nonlinear(const NormalizedSystem& s, const SteadyState& steady, double x,
                                                      int n_periods = 200, const ResponseOptions& ropt = {}) {
  if (!(s.epsilon_p > 0.0)) throw PreconditionError("nonlinear probe response requires epsilon_p > 0");
  const double big_delta = s.omega_m + x;
  const DemodulationPlan plan = plan_demodulation(s, big_delta, n_periods);
  IntegrationOptions opt;
  opt.dt = plan.dt;
  opt.t_end = static_cast<double>(plan.steps) * plan.dt;
  opt.record_from = plan.record_from;
  const Trajectory traj = integrate_nonlinear(s, big_delta, opt, state_from_steady(s, steady));
  const auto [m, p] = demodulate_series(traj.t, traj.cavity_series(s.n_cavities - 1), big_delta, n_periods);
  return {epsilon_T_from_sideband(m, s.kappa_n(), s.epsilon_p, ropt), m, p};
}

/// Time-domain spectrum on the given x/κ_N points (linearized equations).
inline ResponseSpectrum timedomain_spectrum(const NormalizedSystem& s, const std::vector<double>& x_over_kappa_n,
                                            int n_periods = 200, const ResponseOptions& ropt = {}) {
  ResponseSpectrum out;
  out.x_grid = x_over_kappa_n;
  out.eps_T.resize(x_over_kappa_n.size());
  out.method = Method::timedomain;
  out.system_hash = system_hash(s);
  out.n_cavities = s.n_cavities;
  if (s.has_atom()) out.atom_position = s.atom->position;
  parallel_for(out.x_grid.size(), [&](std::size_t k) {
    try {
      out.eps_T[k] = timedomain_epsilon_T(s, out.x_grid[k] * s.kappa_n(), n_periods, ropt).eps_T;
    } catch (const std::exception& e) {
      throw SpectrumPointError(e.what(), out.x_grid[k]);
    }
  });
  return out;
}

}  // namespace omit
