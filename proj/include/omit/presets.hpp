#pragma once

// Built-in parameter sets (MHz). Shared values:
// ω_m = 51.8, γ_m = 0.041, κ_N = g_n = 15, other κ = 0.027, G = 10,
// atom g_a = 10, γ_a = 0.01.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omit/model.hpp"
#include "omit/steady.hpp"

namespace omit::presets {

inline PhysicalConfig chain(int n, double G_mag = 10.0) {
  PhysicalConfig c;
  c.n_cavities = n;
  c.kappa.assign(static_cast<std::size_t>(n), 0.027);
  c.kappa.back() = 15.0;
  c.hopping.assign(static_cast<std::size_t>(n - 1), 15.0);
  c.omega_m = 51.8;
  c.gamma_m = 0.041;
  c.drive_mode = DirectG{G_mag, 0.0, -1.0};
  c.detuning_mode = ResolvedSideband{};
  return c;
}

inline PhysicalConfig with_atom(PhysicalConfig c, int position) {
  c.atom = Atom{position, 10.0, 0.01};
  return c;
}

/// Drive-mode version of chain(n): single-photon rate g (MHz) and the pump
/// amplitude for which |g·c̄₁| equals G_mag. In resolved-sideband mode the
/// chain is linear in ε_c, so one unit-drive solve fixes the amplitude.
inline PhysicalConfig drive_chain(int n, double g = 0.1, double G_mag = 10.0, double probe_ratio = 1e-3) {
  PhysicalConfig c = chain(n);
  c.drive_mode = Drive{1.0, g};
  const NormalizedSystem s = normalize_rates(c);
  const double c1 = std::abs(chain_steady_linear(s, 0.0, {-1.0, 0.0}, s.epsilon_c).front());
  const double eps_c = G_mag / g / c1;
  c.drive_mode = Drive{eps_c, g};
  c.epsilon_p = probe_ratio * eps_c;
  return c;
}

/// Every preset name, in a stable order.
inline std::vector<std::string> names() {
  return {"fig2a", "fig2b", "fig2c", "fig3-8", "fig3-10", "fig3-12", "fig4a1",
          "fig4a3", "fig4c2", "fig4c4", "fig4b1", "fig4b3", "fig4d2", "fig2a-drive"};
}

inline std::optional<PhysicalConfig> find(std::string_view name) {
  if (name == "fig2a") return chain(2);
  if (name == "fig2b") return chain(3);
  if (name == "fig2c") return chain(4);
  if (name == "fig3-8") return chain(4, 8.0);
  if (name == "fig3-10") return chain(4, 10.0);
  if (name == "fig3-12") return chain(4, 12.0);
  if (name == "fig4a1") return with_atom(chain(4), 1);
  if (name == "fig4a3") return with_atom(chain(4), 3);
  if (name == "fig4c" || name == "fig4c2") return with_atom(chain(4), 2);
  if (name == "fig4c4") return with_atom(chain(4), 4);
  if (name == "fig4b1") return with_atom(chain(3), 1);
  if (name == "fig4b3") return with_atom(chain(3), 3);
  if (name == "fig4d2") return with_atom(chain(3), 2);
  if (name == "fig2a-drive") return drive_chain(2);
  return std::nullopt;
}

}  // namespace omit::presets
