// Acceptance checks A1-A10. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "omit/omit.hpp"
#include "support/oracles.hpp"

using namespace omit;

namespace {

constexpr double kXMin = -3.0;
constexpr double kXMax = 3.0;
constexpr std::size_t kPoints = 20001;

ResponseSpectrum cf_spectrum(const PhysicalConfig& c) {
  return spectrum(normalize(c), kXMin, kXMax, kPoints, Method::cf);
}

WindowReport report(const PhysicalConfig& c) { return detect_windows(cf_spectrum(c)); }

double width(const PhysicalConfig& c) { return central_feature_width(cf_spectrum(c)); }

PhysicalConfig quiet(PhysicalConfig c, double factor) {
  for (std::size_t k = 0; k + 1 < c.kappa.size(); ++k) c.kappa[k] *= factor;
  c.gamma_m *= factor;
  if (c.atom) c.atom->gamma_a *= factor;
  return c;
}

std::string feature(const WindowReport& r) {
  return r.central_feature ? std::string(to_string(*r.central_feature)) : std::string("none");
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int run(const char* id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %s: %s |%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str(), secs);
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

int main() {
  int failures = 0;

  failures += run("A1", "window counts and central parity, N=2,3,4", [](Outcome& o) {
    for (int n = 2; n <= 4; ++n) {
      const WindowReport r = report(presets::chain(n));
      const auto want = n % 2 == 0 ? CentralFeature::AbsorptivePeak : CentralFeature::AbsorptiveDip;
      o.detail << " N=" << n << ":" << r.count << "," << feature(r);
      o.check(r.count == static_cast<std::size_t>(n), "count N=" + std::to_string(n));
      o.check(r.central_feature == want, "feature N=" + std::to_string(n));
    }
  });

  failures += run("A2", "closed form vs linear solve, max deviation < 1e-9", [](Outcome& o) {
    for (int n = 2; n <= 4; ++n) {
      const NormalizedSystem s = normalize(presets::chain(n));
      const ResponseSpectrum a = spectrum(s, kXMin, kXMax, kPoints, Method::cf);
      const ResponseSpectrum b = spectrum(s, kXMin, kXMax, kPoints, Method::linear);
      double worst = 0.0;
      for (std::size_t k = 0; k < a.eps_T.size(); ++k) worst = std::max(worst, std::abs(a.eps_T[k] - b.eps_T[k]));
      o.detail << " N=" << n << ":" << worst;
      o.check(worst < 1e-9, "N=" + std::to_string(n));
    }
  });

  failures += run("A3", "central width increases with G in {8,10,12}, N=4", [](Outcome& o) {
    double prev = 0.0;
    for (double g : {8.0, 10.0, 12.0}) {
      const double w = width(presets::chain(4, g));
      o.detail << " G=" << g << ":" << w;
      o.check(w > prev, "G=" + std::to_string(g));
      prev = w;
    }
  });

  failures += run("A4", "atom parity, N=4", [](Outcome& o) {
    const double w0 = width(presets::chain(4));
    o.detail << " no atom width " << w0;
    for (int pos = 1; pos <= 4; ++pos) {
      const PhysicalConfig c = presets::with_atom(presets::chain(4), pos);
      const ResponseSpectrum sp = cf_spectrum(c);
      const WindowReport r = detect_windows(sp);
      o.detail << "; cavity " << pos << ":" << r.count << "," << feature(r);
      if (pos % 2 == 1) {
        const double w = central_feature_width(sp);
        o.detail << ",w=" << w;
        o.check(r.count == 4, "count cavity " + std::to_string(pos));
        o.check(w > w0, "width cavity " + std::to_string(pos));
      } else {
        o.check(r.count == 5, "count cavity " + std::to_string(pos));
        o.check(r.central_feature == CentralFeature::SplitPeak, "split cavity " + std::to_string(pos));
      }
    }
  });

  failures += run("A5", "atom parity, N=3", [](Outcome& o) {
    const double w0 = width(presets::chain(3));
    o.detail << " no atom width " << w0;
    for (int pos = 1; pos <= 3; ++pos) {
      const PhysicalConfig c = presets::with_atom(presets::chain(3), pos);
      const ResponseSpectrum sp = cf_spectrum(c);
      const WindowReport r = detect_windows(sp);
      o.detail << "; cavity " << pos << ":" << r.count << "," << feature(r);
      if (pos == 2) {
        o.check(r.count == 4, "count cavity 2");
      } else {
        const double w = central_feature_width(sp);
        o.detail << ",w=" << w;
        o.check(r.count == 3, "count cavity " + std::to_string(pos));
        o.check(r.central_feature == CentralFeature::AbsorptiveDip, "dip cavity " + std::to_string(pos));
        o.check(w > w0, "width cavity " + std::to_string(pos));
      }
    }
  });

  failures += run("A6", "mechanics off: N-1 windows; atom restores N with narrower centre", [](Outcome& o) {
    for (int n = 2; n <= 4; ++n) {
      const WindowReport bare = report(presets::chain(n, 0.0));
      const PhysicalConfig atom_only = presets::with_atom(presets::chain(n, 0.0), 1);
      const ResponseSpectrum sp = cf_spectrum(atom_only);
      const WindowReport r = detect_windows(sp);
      const double w = central_feature_width(sp);
      const double w_ref = width(presets::with_atom(presets::chain(n), 1));
      o.detail << " N=" << n << ":" << bare.count << "/" << r.count << ",w=" << w << "<" << w_ref;
      o.check(bare.count == static_cast<std::size_t>(n - 1), "G=0 count N=" + std::to_string(n));
      o.check(r.count == static_cast<std::size_t>(n), "atom count N=" + std::to_string(n));
      o.check(w < w_ref, "width N=" + std::to_string(n));
    }
  });

  failures += run("A7", "band edges for N=30", [](Outcome& o) {
    PhysicalConfig c = quiet(presets::chain(30), 0.01);
    const auto roots = predict_windows_lossless(normalize(c));
    double lo = 0.0, hi = 0.0;
    for (double r : roots) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    o.detail << " roots " << roots.size() << ", range [" << lo << ", " << hi << "]";
    o.check(!roots.empty(), "roots");
    o.check(lo >= -2.001 && hi <= 2.001, "inside +-2.001");
    o.check(std::max(-lo, hi) > 1.9, "outermost > 1.9");
  });

  failures += run("A8", "time-domain integration reproduces the two-sideband solve", [](Outcome& o) {
    const std::vector<double> xs{-2.0, -1.0, 0.0, 0.5, 1.5};
    const NormalizedSystem s = normalize(presets::chain(2));
    const PhysicalConfig drive = *presets::find("fig2a-drive");
    const SteadyState st = solve_self_consistent(drive);
    const NormalizedSystem sd = normalize(drive, st);
    double worst_lin = 0.0, worst_nl = 0.0;
    for (double u : xs) {
      const double x = u * s.kappa_n();
      const cplx ref = epsilon_T_full(x, s, 1.0).eps_T;
      worst_lin = std::max(worst_lin, rel(timedomain_epsilon_T(s, x).eps_T, ref));
      const double xd = u * sd.kappa_n();
      const cplx ref_d = epsilon_T_full(xd, sd, sd.epsilon_p).eps_T;
      worst_nl = std::max(worst_nl, rel(timedomain_epsilon_T_nonlinear(sd, st, xd).eps_T, ref_d));
    }
    o.detail << " linearized " << worst_lin << ", nonlinear " << worst_nl;
    o.check(worst_lin < 0.01, "linearized within 1%");
    o.check(worst_nl < 0.02, "nonlinear within 2%");
  });

  failures += run("A9", "steady state: residual and long-time limit", [](Outcome& o) {
    PhysicalConfig c = *presets::find("fig2a-drive");
    c.epsilon_p = 0.0;
    const SteadyState st = solve_self_consistent(c);
    o.detail << " residual " << st.residual_norm;
    o.check(st.residual_norm < 1e-10, "residual");
    const NormalizedSystem s = normalize(c, st);
    IntegrationOptions opt;
    opt.t_end = 30.0 / slowest_decay(s);
    opt.stride = 1000;
    opt.record_from = opt.t_end - 1.0;
    const Trajectory t = integrate_nonlinear(s, s.omega_m, opt);
    const std::size_t last = t.size() - 1;
    double num = 0.0, den = 0.0;
    for (int n = 0; n < s.n_cavities; ++n) {
      num = std::max(num, std::abs(t.cavity(last, n) - st.c_bar[static_cast<std::size_t>(n)]));
      den = std::max(den, std::abs(st.c_bar[static_cast<std::size_t>(n)]));
    }
    const double lam = 2.0 * t.b[last].real();
    num = std::max(num, std::abs(lam - st.lambda_bar) * den / std::max(std::abs(st.lambda_bar), 1e-300));
    o.detail << ", t_end " << opt.t_end << " us, relative deviation " << num / den;
    o.check(num / den < 1e-6, "long-time limit");
  });

  failures += run("A10", "symmetry, passivity and lossless roots", [](Outcome& o) {
    std::mt19937_64 rng(2024);
    double worst_sym = 0.0;
    std::size_t passive_violations = 0;
    std::uniform_real_distribution<double> xdist(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const NormalizedSystem s = normalize(oracle::random_config(rng, trial % 2 == 0));
      for (int k = 0; k < 20; ++k) {
        const double x = xdist(rng) * s.kappa_n();
        const cplx a = epsilon_T_cf(x, s);
        const cplx b = epsilon_T_cf(-x, s);
        worst_sym = std::max(worst_sym, std::abs(b - std::conj(a)));
        const auto d = response_denominator(x, s);
        if (std::abs(a) > 2.0 + 1e-12) ++passive_violations;
        if (d && d->real() < s.kappa_n() * (1.0 - 1e-12)) ++passive_violations;
      }
    }
    o.detail << " symmetry " << worst_sym << ", passivity violations " << passive_violations;
    o.check(worst_sym < 1e-12, "conjugation symmetry");
    o.check(passive_violations == 0, "passivity");

    double worst_root = 0.0;
    for (const char* name : {"fig2a", "fig2b", "fig2c", "fig4a1", "fig4a3", "fig4b1", "fig4b3"}) {
      const NormalizedSystem s = normalize(quiet(*presets::find(name), 0.01));
      const auto roots = predict_windows_lossless(s);
      const WindowReport r = detect_windows(spectrum(s, kXMin, kXMax, kPoints, Method::cf));
      if (r.count != roots.size()) {
        o.check(false, std::string("root count ") + name);
        continue;
      }
      for (std::size_t k = 0; k < roots.size(); ++k) {
        worst_root = std::max(worst_root, std::abs(roots[k] - r.windows[k].center_x));
      }
    }
    o.detail << ", root vs centre " << worst_root;
    o.check(worst_root < 0.01, "lossless roots within 0.01");
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
