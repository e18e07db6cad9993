#pragma once

// Physical description of an N-cavity optomechanical chain and its conversion
// to the angular-frequency parameter set consumed by every solver.
//
// Config values are linear frequencies in MHz; a value V means the angular
// rate 2π·V rad/µs. Internally everything is rad/µs and times are µs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "omit/errors.hpp"
#include "omit/steady_state.hpp"

namespace omit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Effective optomechanical rate given directly.
struct DirectG {
  double G_mag = 0.0;    // MHz
  double G_phase = 0.0;  // rad
  double sigma_z_fixed = -1.0;
};

/// Explicit pump; G follows from the steady state as g·c̄₁.
struct Drive {
  double epsilon_c = 0.0;        // MHz
  double g_single_photon = 0.0;  // MHz
};

using DriveMode = std::variant<DirectG, Drive>;

struct Atom {
  int position = 1;  // 1-based cavity index
  double g_a = 0.0;
  double gamma_a = 0.0;
};

/// Δ_n = Δ̃₁ = Δ_a = ω_m.
struct ResolvedSideband {};

struct ExplicitDetuning {
  std::vector<double> Delta;  // bare Δ_1..Δ_N, MHz
  double Delta_a = 0.0;
};

using DetuningMode = std::variant<ResolvedSideband, ExplicitDetuning>;

struct PhysicalConfig {
  int n_cavities = 1;
  std::vector<double> kappa;    // κ_1..κ_N
  std::vector<double> hopping;  // g_1..g_{N-1}
  double omega_m = 0.0;
  double gamma_m = 0.0;
  DriveMode drive_mode = DirectG{};
  std::optional<Atom> atom;
  DetuningMode detuning_mode = ResolvedSideband{};
  double epsilon_p = 1.0;
};

struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

inline std::string to_string(const Violation& v) { return v.path + ": " + v.message; }

/// Every violated invariant of `config`; empty iff admissible.
inline std::vector<Violation> validate(const PhysicalConfig& config) {
  std::vector<Violation> out;
  auto add = [&out](std::string path, std::string message) {
    out.push_back({std::move(path), std::move(message)});
  };
  auto finite = [](double v) { return std::isfinite(v); };

  const int n = config.n_cavities;
  if (n < 1) add("n_cavities", "n_cavities must be at least 1");

  if (n >= 1 && config.kappa.size() != static_cast<std::size_t>(n)) {
    add("kappa", "kappa must have n_cavities entries");
  }
  for (std::size_t k = 0; k < config.kappa.size(); ++k) {
    if (!finite(config.kappa[k]) || config.kappa[k] <= 0.0) {
      add("kappa[" + std::to_string(k) + "]", "kappa must be positive");
    }
  }

  if (n >= 1 && config.hopping.size() != static_cast<std::size_t>(n - 1)) {
    add("hopping", "hopping must have n_cavities - 1 entries");
  }
  for (std::size_t k = 0; k < config.hopping.size(); ++k) {
    if (!finite(config.hopping[k]) || config.hopping[k] < 0.0) {
      add("hopping[" + std::to_string(k) + "]", "hopping must be nonnegative");
    }
  }

  if (!finite(config.omega_m) || config.omega_m <= 0.0) add("omega_m", "omega_m must be positive");
  if (!finite(config.gamma_m) || config.gamma_m < 0.0) add("gamma_m", "gamma_m must be nonnegative");
  if (!finite(config.epsilon_p) || config.epsilon_p < 0.0) {
    add("epsilon_p", "epsilon_p must be nonnegative");
  }

  if (const auto* d = std::get_if<DirectG>(&config.drive_mode)) {
    if (!finite(d->G_mag) || d->G_mag < 0.0) add("drive_mode.G_mag", "G_mag must be nonnegative");
    if (!finite(d->G_phase)) add("drive_mode.G_phase", "G_phase must be finite");
    if (!finite(d->sigma_z_fixed) || d->sigma_z_fixed < -1.0 || d->sigma_z_fixed > 0.0) {
      add("drive_mode.sigma_z_fixed", "sigma_z_fixed must lie in [-1, 0]");
    }
  } else {
    const auto& dr = std::get<Drive>(config.drive_mode);
    if (!finite(dr.epsilon_c)) add("drive_mode.epsilon_c", "epsilon_c must be finite");
    if (!finite(dr.g_single_photon) || dr.g_single_photon < 0.0) {
      add("drive_mode.g_single_photon", "g_single_photon must be nonnegative");
    }
  }

  if (config.atom) {
    const Atom& a = *config.atom;
    if (a.position < 1 || a.position > n) add("atom.position", "atom.position out of range");
    if (!finite(a.g_a) || a.g_a < 0.0) add("atom.g_a", "g_a must be nonnegative");
    if (!finite(a.gamma_a) || a.gamma_a < 0.0) add("atom.gamma_a", "gamma_a must be nonnegative");
  }

  if (const auto* e = std::get_if<ExplicitDetuning>(&config.detuning_mode)) {
    if (n >= 1 && e->Delta.size() != static_cast<std::size_t>(n)) {
      add("detuning_mode.Delta", "Delta must have n_cavities entries");
    }
    for (std::size_t k = 0; k < e->Delta.size(); ++k) {
      if (!finite(e->Delta[k])) add("detuning_mode.Delta[" + std::to_string(k) + "]", "Delta must be finite");
    }
    if (!finite(e->Delta_a)) add("detuning_mode.Delta_a", "Delta_a must be finite");
  }
  return out;
}

/// Atom parameters in angular units.
struct AtomSite {
  int position = 1;
  double g_a = 0.0;
  double gamma_a = 0.0;
};

enum class DriveKind { DirectG, Drive };

/// Angular-frequency (rad/µs) parameter set with resolved detunings and G.
struct NormalizedSystem {
  int n_cavities = 1;
  std::vector<double> kappa;
  std::vector<double> hopping;
  double omega_m = 0.0;
  double gamma_m = 0.0;

  std::vector<double> delta;   // bare Δ_n entering the time-dependent equations
  double delta_tilde_1 = 0.0;  // Δ₁ − g·λ̄, detuning of cavity 1 seen by fluctuations
  double delta_a = 0.0;
  bool resolved_sideband = true;

  std::complex<double> G{0.0, 0.0};
  std::complex<double> sigma_z_bar{-1.0, 0.0};
  std::optional<AtomSite> atom;

  DriveKind drive_kind = DriveKind::DirectG;
  double g_single_photon = 0.0;
  double epsilon_c = 0.0;
  double epsilon_p = 0.0;
  double lambda_bar = 0.0;
  double field_scale = 0.0;  // max |c̄_n| of the steady state (Drive mode)

  double kappa_n() const { return kappa.back(); }
  bool has_atom() const { return atom.has_value() && atom->g_a != 0.0; }
};

/// Unit conversion and detuning resolution only: G = 0 and σ̄_z = −1 in Drive
/// mode, which is the input the steady-state solver needs.
inline NormalizedSystem normalize_rates(const PhysicalConfig& config) {
  if (auto v = validate(config); !v.empty()) {
    throw PreconditionError("invalid configuration: " + to_string(v.front()));
  }
  NormalizedSystem s;
  s.n_cavities = config.n_cavities;
  for (double k : config.kappa) s.kappa.push_back(kTwoPi * k);
  for (double g : config.hopping) s.hopping.push_back(kTwoPi * g);
  s.omega_m = kTwoPi * config.omega_m;
  s.gamma_m = kTwoPi * config.gamma_m;
  s.epsilon_p = kTwoPi * config.epsilon_p;

  if (config.atom) {
    s.atom = AtomSite{config.atom->position, kTwoPi * config.atom->g_a, kTwoPi * config.atom->gamma_a};
  }

  if (std::holds_alternative<ResolvedSideband>(config.detuning_mode)) {
    s.resolved_sideband = true;
    s.delta.assign(static_cast<std::size_t>(s.n_cavities), s.omega_m);
    s.delta_tilde_1 = s.omega_m;
    s.delta_a = s.omega_m;
  } else {
    const auto& e = std::get<ExplicitDetuning>(config.detuning_mode);
    s.resolved_sideband = false;
    for (double d : e.Delta) s.delta.push_back(kTwoPi * d);
    s.delta_tilde_1 = s.delta.front();
    s.delta_a = kTwoPi * e.Delta_a;
  }

  if (const auto* d = std::get_if<DirectG>(&config.drive_mode)) {
    s.drive_kind = DriveKind::DirectG;
    s.G = std::polar(kTwoPi * d->G_mag, d->G_phase);
    s.sigma_z_bar = {d->sigma_z_fixed, 0.0};
  } else {
    const auto& dr = std::get<Drive>(config.drive_mode);
    s.drive_kind = DriveKind::Drive;
    s.g_single_photon = kTwoPi * dr.g_single_photon;
    s.epsilon_c = kTwoPi * dr.epsilon_c;
  }
  return s;
}

/// Full normalization. Drive mode takes c̄₁, λ̄ and σ̄_z from `steady`.
inline NormalizedSystem normalize(const PhysicalConfig& config,
                                  const std::optional<SteadyState>& steady = std::nullopt) {
  NormalizedSystem s = normalize_rates(config);
  if (s.drive_kind == DriveKind::DirectG) return s;

  if (!steady) throw MissingDependencyError("Drive mode requires a steady state to normalize");
  if (steady->c_bar.size() != static_cast<std::size_t>(s.n_cavities)) {
    throw PreconditionError("steady state has the wrong number of cavities");
  }
  s.lambda_bar = steady->lambda_bar;
  for (const auto& c : steady->c_bar) s.field_scale = std::max(s.field_scale, std::abs(c));
  s.G = s.g_single_photon * steady->c_bar.front();
  s.sigma_z_bar = s.atom ? steady->sigma_z_bar : std::complex<double>{-1.0, 0.0};
  const double shift = s.g_single_photon * s.lambda_bar;
  if (s.resolved_sideband) {
    // Δ̃₁ is pinned to ω_m, so the bare detuning absorbs the shift.
    s.delta.front() = s.omega_m + shift;
  } else {
    s.delta_tilde_1 = s.delta.front() - shift;
  }
  return s;
}

/// Inverse of normalize for the user-facing fields (divides rates by 2π).
inline PhysicalConfig denormalize(const NormalizedSystem& s) {
  PhysicalConfig c;
  c.n_cavities = s.n_cavities;
  for (double k : s.kappa) c.kappa.push_back(k / kTwoPi);
  for (double g : s.hopping) c.hopping.push_back(g / kTwoPi);
  c.omega_m = s.omega_m / kTwoPi;
  c.gamma_m = s.gamma_m / kTwoPi;
  c.epsilon_p = s.epsilon_p / kTwoPi;
  if (s.drive_kind == DriveKind::DirectG) {
    c.drive_mode = DirectG{std::abs(s.G) / kTwoPi, std::arg(s.G), s.sigma_z_bar.real()};
  } else {
    c.drive_mode = Drive{s.epsilon_c / kTwoPi, s.g_single_photon / kTwoPi};
  }
  if (s.atom) c.atom = Atom{s.atom->position, s.atom->g_a / kTwoPi, s.atom->gamma_a / kTwoPi};
  if (s.resolved_sideband) {
    c.detuning_mode = ResolvedSideband{};
  } else {
    ExplicitDetuning e;
    for (double d : s.delta) e.Delta.push_back(d / kTwoPi);
    e.Delta_a = s.delta_a / kTwoPi;
    c.detuning_mode = e;
  }
  return c;
}

}  // namespace omit
