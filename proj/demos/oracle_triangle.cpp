// Continued fraction, two-sideband solve and time-domain demodulation for the
// two-cavity chain at a handful of detunings.

#include <cstdio>

#include "omit/omit.hpp"

int main() {
  const omit::NormalizedSystem s = omit::normalize(omit::presets::chain(2));
  std::printf("%6s  %22s  %22s  %22s\n", "x/kN", "cf", "full", "timedomain");
  for (double u : {-2.0, -1.0, 0.0, 0.5, 1.5}) {
    const double x = u * s.kappa_n();
    const auto cf = omit::epsilon_T_cf(x, s);
    const auto full = omit::epsilon_T_full(x, s, 1.0).eps_T;
    const auto td = omit::timedomain_epsilon_T(s, x).eps_T;
    std::printf("%6.2f  %10.6f %+10.6fi  %10.6f %+10.6fi  %10.6f %+10.6fi\n", u, cf.real(), cf.imag(), full.real(),
                full.imag(), td.real(), td.imag());
  }
}
