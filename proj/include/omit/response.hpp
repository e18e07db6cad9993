#pragma once

// Probe response ε_T = 2κ_N c_{N,−}/ε_p of the chain, evaluated three ways:
//  * epsilon_T_cf     - continued fraction, built from cavity 1 outwards
//  * epsilon_T_linear - direct (N+2)-dimensional solve of the resolved-sideband equations
//  * epsilon_T_full   - both sidebands O₋, O₊ of the linearized fluctuation equations
//
// Sign convention: every evaluator returns ε_T with cavity factors (κ + ix).
// The fluctuation equations with the e^{−iΔt} ansatz produce the conjugate,
// (κ − ix); epsilon_T_full therefore conjugates its physical c_{N,−}. The real
// part is identical in both conventions. ResponseOptions::paper_sign returns
// the (κ − ix) form instead.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omit/errors.hpp"
#include "omit/model.hpp"
#include "omit/parallel.hpp"
#include "omit/steady.hpp"

namespace omit {

struct ResponseOptions {
  bool paper_sign = false;           // emit conj(ε_T)
  bool literal_atom_weight = false;  // g_a²|σ̄_z|² instead of g_a²(−σ̄_z)
};

namespace detail {

inline cplx apply_convention(cplx eps, const ResponseOptions& opt) {
  return opt.paper_sign ? std::conj(eps) : eps;
}

inline void require_resolved(const NormalizedSystem& s, const char* who) {
  if (!s.resolved_sideband) throw PreconditionError(std::string(who) + " requires ResolvedSideband detunings");
}

inline cplx atom_weight(const NormalizedSystem& s, const ResponseOptions& opt) {
  const double ga2 = s.atom->g_a * s.atom->g_a;
  return opt.literal_atom_weight ? cplx{ga2 * std::norm(s.sigma_z_bar), 0.0} : -ga2 * s.sigma_z_bar;
}

/// Value of a continued-fraction level, with an explicit "infinite" state so
/// that exact poles of inner terms propagate as limits.
struct Level {
  cplx value{0.0, 0.0};
  bool infinite = false;

  void add_pole(cplx weight, cplx den) {
    if (infinite || weight == cplx{0.0, 0.0}) return;
    if (den == cplx{0.0, 0.0}) {
      infinite = true;
      return;
    }
    value += weight / den;
  }
};

}  // namespace detail

/// Continued-fraction denominator D_N(x); x in rad/µs.
///   D₁ = κ₁ + ix + |G|²/(γ_m + ix),  D_k = κ_k + ix + g_{k−1}²/D_{k−1},
/// plus g_a²(−σ̄_z)/(γ_a + ix) on the level of the atom's cavity.
/// Returns nullopt when D_N is infinite.
inline std::optional<cplx> response_denominator(double x, const NormalizedSystem& s,
                                                const ResponseOptions& opt = {}) {
  const cplx ix{0.0, x};
  const bool atom = s.has_atom();
  detail::Level level;
  for (int k = 1; k <= s.n_cavities; ++k) {
    const auto uk = static_cast<std::size_t>(k - 1);
    detail::Level next;
    next.value = s.kappa[uk] + ix;
    if (k == 1) {
      next.add_pole(std::norm(s.G), s.gamma_m + ix);
    } else {
      const double g = s.hopping[uk - 1];
      if (g != 0.0 && !level.infinite) {
        if (level.value == cplx{0.0, 0.0}) {
          next.infinite = true;
        } else {
          next.value += g * g / level.value;
        }
      }
    }
    if (atom && s.atom->position == k) next.add_pole(detail::atom_weight(s, opt), s.atom->gamma_a + ix);
    level = next;
  }
  if (level.infinite) return std::nullopt;
  return level.value;
}

/// Closed-form ε_T = 2κ_N / D_N(x).
inline cplx epsilon_T_cf(double x, const NormalizedSystem& s, const ResponseOptions& opt = {}) {
  detail::require_resolved(s, "epsilon_T_cf");
  const auto d = response_denominator(x, s, opt);
  if (!d) return {0.0, 0.0};
  if (*d == cplx{0.0, 0.0}) throw SingularSystemError("epsilon_T_cf: D_N vanishes");
  return detail::apply_convention(2.0 * s.kappa_n() / *d, opt);
}

/// Assembles and solves, in unknowns (c_{1,−}..c_{N,−}, b₋, σ₋₋),
///   0 = −(κ_n + ix) c_n − i(g_{n−1} c_{n−1} + g_n c_{n+1}) + ε_p δ_{nN}
///       + [n = 1] iG b₋ + [n = i] (−i g_a σ₋₋)
///   0 = −(γ_m + ix) b₋ + iG* c₁
///   0 = −(γ_a + ix) σ₋₋ + i g_a σ̄_z c_i
inline cplx epsilon_T_linear(double x, const NormalizedSystem& s, double epsilon_p,
                             const ResponseOptions& opt = {}) {
  detail::require_resolved(s, "epsilon_T_linear");
  if (!(epsilon_p > 0.0)) throw PreconditionError("epsilon_T_linear requires epsilon_p > 0");
  const int n = s.n_cavities;
  const int ib = n;
  const int is = n + 1;
  const cplx ix{0.0, x};

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 2, n + 2);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 2);
  for (int k = 0; k < n; ++k) {
    a(k, k) = -(s.kappa[static_cast<std::size_t>(k)] + ix);
    if (k + 1 < n) a(k, k + 1) = a(k + 1, k) = -kI * s.hopping[static_cast<std::size_t>(k)];
  }
  rhs(n - 1) = -epsilon_p;

  if (s.G != cplx{0.0, 0.0}) {
    a(0, ib) = kI * s.G;
    a(ib, ib) = -(s.gamma_m + ix);
    a(ib, 0) = kI * std::conj(s.G);
  } else {
    a(ib, ib) = 1.0;
  }
  if (s.has_atom()) {
    const int ci = s.atom->position - 1;
    a(ci, is) = -kI * s.atom->g_a;
    a(is, is) = -(s.atom->gamma_a + ix);
    a(is, ci) = kI * s.atom->g_a * s.sigma_z_bar;
  } else {
    a(is, is) = 1.0;
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  detail::require_invertible(lu, "epsilon_T_linear");
  const Eigen::VectorXcd u = lu.solve(rhs);
  return detail::apply_convention(2.0 * s.kappa_n() * u(n - 1) / epsilon_p, opt);
}

struct FullResponse {
  cplx eps_T;          // library convention, comparable with epsilon_T_cf
  cplx c_n_minus;      // physical amplitude of e^{−iΔt} in δc_N
  cplx c_n_plus;       // physical amplitude of e^{+iΔt} in δc_N
  double upper_sideband_fraction = 0.0;  // |c_{N,+}| / |c_{N,−}|
};

/// Two-sideband solve of the linearized fluctuation equations with
/// δO = O₋e^{−iΔt} + O₊e^{iΔt}, Δ = ω_m + x. The mechanical terms G(δb* + δb)
/// and G δc₁* couple O₋ to O₊*, so the unknowns are
/// u = (c₋, b₋, σ₋) and v = (c₊*, b₊*, σ₊*), 2(N+2) in total.
inline FullResponse epsilon_T_full(double x, const NormalizedSystem& s, double epsilon_p,
                                   const ResponseOptions& opt = {}) {
  if (!(epsilon_p > 0.0)) throw PreconditionError("epsilon_T_full requires epsilon_p > 0");
  const int n = s.n_cavities;
  const int m = n + 2;
  const int ib = n;
  const int is = n + 1;
  const double big_delta = s.omega_m + x;
  const cplx G = s.G;
  const cplx Gc = std::conj(G);

  auto det_of = [&](int k) {
    return k == 0 ? s.delta_tilde_1 : s.delta[static_cast<std::size_t>(k)];
  };

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(2 * m);
  const int v0 = m;  // offset of the conjugated upper-sideband block

  for (int k = 0; k < n; ++k) {
    const double kap = s.kappa[static_cast<std::size_t>(k)];
    const double det = det_of(k);
    a(k, k) = -cplx{kap, det - big_delta};
    a(v0 + k, v0 + k) = -cplx{kap, -det - big_delta};
    if (k + 1 < n) {
      const double g = s.hopping[static_cast<std::size_t>(k)];
      a(k, k + 1) = a(k + 1, k) = -kI * g;
      a(v0 + k, v0 + k + 1) = a(v0 + k + 1, v0 + k) = kI * g;
    }
  }
  rhs(n - 1) = -epsilon_p;

  if (G != cplx{0.0, 0.0}) {
    // c₁ rows: iG(b₋ + b₊*) and its conjugate −iG*(b₋ + b₊*).
    a(0, ib) += kI * G;
    a(0, v0 + ib) += kI * G;
    a(v0, ib) += -kI * Gc;
    a(v0, v0 + ib) += -kI * Gc;
    // b rows: i(G c₊* + G* c₋) and −i(G* c₋ + G c₊*).
    a(ib, ib) = -cplx{s.gamma_m, s.omega_m - big_delta};
    a(ib, 0) += kI * Gc;
    a(ib, v0) += kI * G;
    a(v0 + ib, v0 + ib) = -cplx{s.gamma_m, -s.omega_m - big_delta};
    a(v0 + ib, 0) += -kI * Gc;
    a(v0 + ib, v0) += -kI * G;
  } else {
    a(ib, ib) = 1.0;
    a(v0 + ib, v0 + ib) = 1.0;
  }

  if (s.has_atom()) {
    const int ci = s.atom->position - 1;
    const double ga = s.atom->g_a;
    const double gam = s.atom->gamma_a;
    a(ci, is) += -kI * ga;
    a(is, is) = -cplx{gam, s.delta_a - big_delta};
    a(is, ci) = kI * ga * s.sigma_z_bar;
    a(v0 + ci, v0 + is) += kI * ga;
    a(v0 + is, v0 + is) = -cplx{gam, -s.delta_a - big_delta};
    a(v0 + is, v0 + ci) = -kI * ga * std::conj(s.sigma_z_bar);
  } else {
    a(is, is) = 1.0;
    a(v0 + is, v0 + is) = 1.0;
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  detail::require_invertible(lu, "epsilon_T_full");
  const Eigen::VectorXcd u = lu.solve(rhs);

  FullResponse r;
  r.c_n_minus = u(n - 1);
  r.c_n_plus = std::conj(u(v0 + n - 1));
  const cplx physical = 2.0 * s.kappa_n() * r.c_n_minus / epsilon_p;
  r.eps_T = opt.paper_sign ? physical : std::conj(physical);
  r.upper_sideband_fraction = std::abs(r.c_n_plus) / std::abs(r.c_n_minus);
  return r;
}

/// Converts a demodulated physical c_{N,−} into ε_T in the library convention.
inline cplx epsilon_T_from_sideband(cplx c_n_minus, double kappa_n, double epsilon_p,
                                    const ResponseOptions& opt = {}) {
  const cplx physical = 2.0 * kappa_n * c_n_minus / epsilon_p;
  return opt.paper_sign ? physical : std::conj(physical);
}

enum class Method { cf, linear, full, timedomain };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cf: return "cf";
    case Method::linear: return "linear";
    case Method::full: return "full";
    case Method::timedomain: return "timedomain";
  }
  return "?";
}

inline Method method_from_string(std::string_view name) {
  if (name == "cf") return Method::cf;
  if (name == "linear") return Method::linear;
  if (name == "full") return Method::full;
  if (name == "timedomain") return Method::timedomain;
  throw PreconditionError("unknown method '" + std::string(name) + "'");
}

/// ε_T sampled on a grid of x/κ_N.
struct ResponseSpectrum {
  std::vector<double> x_grid;  // units of κ_N, strictly increasing
  std::vector<cplx> eps_T;
  Method method = Method::cf;
  std::string system_hash;
  std::optional<int> n_cavities;
  std::optional<int> atom_position;
};

/// FNV-1a over the numeric content of the system, as 16 hex digits.
inline std::string system_hash(const NormalizedSystem& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  auto mixd = [&](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
  mix(static_cast<std::uint64_t>(s.n_cavities));
  for (double v : s.kappa) mixd(v);
  for (double v : s.hopping) mixd(v);
  mixd(s.omega_m);
  mixd(s.gamma_m);
  for (double v : s.delta) mixd(v);
  mixd(s.delta_tilde_1);
  mixd(s.delta_a);
  mix(s.resolved_sideband ? 1U : 0U);
  mixd(s.G.real());
  mixd(s.G.imag());
  mixd(s.sigma_z_bar.real());
  mixd(s.sigma_z_bar.imag());
  if (s.atom) {
    mix(static_cast<std::uint64_t>(s.atom->position));
    mixd(s.atom->g_a);
    mixd(s.atom->gamma_a);
  }
  mixd(s.epsilon_p);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Uniform grid of n points on [lo, hi]; the last point is hi exactly.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = (k + 1 == n) ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return x;
}

/// Evaluates `method` (cf, linear or full) at every grid point. Points are
/// independent and computed concurrently; the output does not depend on the
/// evaluation order.
inline ResponseSpectrum spectrum(const NormalizedSystem& s, double x_min, double x_max,
                                 std::size_t n_points, Method method, const ResponseOptions& opt = {}) {
  if (n_points < 2) throw PreconditionError("spectrum requires at least 2 points");
  if (!(x_max > x_min)) throw PreconditionError("spectrum requires x_max > x_min");
  if (method == Method::timedomain) {
    throw PreconditionError("time-domain spectra are produced by timedomain_spectrum");
  }

  ResponseSpectrum out;
  out.x_grid = uniform_grid(x_min, x_max, n_points);
  out.eps_T.resize(n_points);
  out.method = method;
  out.system_hash = system_hash(s);
  out.n_cavities = s.n_cavities;
  if (s.has_atom()) out.atom_position = s.atom->position;

  const double kn = s.kappa_n();
  const double eps_p = s.epsilon_p > 0.0 ? s.epsilon_p : 1.0;
  parallel_for(n_points, [&](std::size_t k) {
    const double x = out.x_grid[k] * kn;
    try {
      switch (method) {
        case Method::cf: out.eps_T[k] = epsilon_T_cf(x, s, opt); break;
        case Method::linear: out.eps_T[k] = epsilon_T_linear(x, s, eps_p, opt); break;
        default: out.eps_T[k] = epsilon_T_full(x, s, eps_p, opt).eps_T; break;
      }
    } catch (const std::exception& e) {
      throw SpectrumPointError(e.what(), out.x_grid[k]);
    }
  });
  return out;
}

}  // namespace omit
