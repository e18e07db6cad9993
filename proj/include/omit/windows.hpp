#pragma once

// Transparency-window analysis of a response spectrum.
//
// A window is a local minimum of |ε_T| deeper than `max_depth` with
// topographic prominence at least `min_prominence`; its width is the
// connected interval around the minimum where Re(ε_T) < `width_level`.
// All levels are anchored to the bare-cavity peak value |ε_T| = 2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "omit/errors.hpp"
#include "omit/model.hpp"
#include "omit/polynomial.hpp"
#include "omit/response.hpp"

namespace omit {

struct WindowThresholds {
  double max_depth = 0.2;
  double min_prominence = 0.1;
  double width_level = 1.0;
  double central_band = 0.2;
  std::size_t min_points = 5;
};

struct Window {
  double center_x = 0.0;  // units of κ_N
  double depth = 0.0;     // min |ε_T|
  double width = 0.0;     // extent of Re(ε_T) < width_level
  double prominence = 0.0;
  double left_x = 0.0;
  double right_x = 0.0;
};

enum class CentralFeature { AbsorptivePeak, AbsorptiveDip, SplitPeak };

inline std::string_view to_string(CentralFeature f) {
  switch (f) {
    case CentralFeature::AbsorptivePeak: return "AbsorptivePeak";
    case CentralFeature::AbsorptiveDip: return "AbsorptiveDip";
    case CentralFeature::SplitPeak: return "SplitPeak";
  }
  return "?";
}

struct WindowReport {
  std::vector<Window> windows;  // sorted by center_x
  std::size_t count = 0;
  std::optional<CentralFeature> central_feature;  // empty when x = 0 is off-grid
  WindowThresholds thresholds;
};

namespace detail {

inline void check_grid(const ResponseSpectrum& sp) {
  if (sp.x_grid.size() != sp.eps_T.size()) throw PreconditionError("spectrum: x_grid and eps_T differ in length");
  for (std::size_t k = 1; k < sp.x_grid.size(); ++k) {
    if (!(sp.x_grid[k] > sp.x_grid[k - 1])) throw PreconditionError("spectrum: x_grid must be strictly increasing");
  }
}

/// Where `y` crosses `level` between samples i and j, by linear interpolation.
inline double crossing(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                       std::size_t j, double level) {
  const double dy = y[j] - y[i];
  if (dy == 0.0) return 0.5 * (x[i] + x[j]);
  return x[i] + (level - y[i]) * (x[j] - x[i]) / dy;
}

/// Connected interval around `start` where y is above (or below) `level`;
/// open ends extend to the grid edge.
inline std::pair<double, double> level_interval(const std::vector<double>& x, const std::vector<double>& y,
                                                std::size_t start, double level, bool above) {
  auto inside = [&](std::size_t k) { return above ? y[k] > level : y[k] < level; };
  std::size_t l = start;
  while (l > 0 && inside(l - 1)) --l;
  std::size_t r = start;
  while (r + 1 < x.size() && inside(r + 1)) ++r;
  const double left = (l == 0) ? x.front() : crossing(x, y, l - 1, l, level);
  const double right = (r + 1 == x.size()) ? x.back() : crossing(x, y, r, r + 1, level);
  return {left, right};
}

inline double interpolate_at(const std::vector<double>& x, const std::vector<double>& y, double at) {
  const auto it = std::lower_bound(x.begin(), x.end(), at);
  if (it == x.begin()) return y.front();
  if (it == x.end()) return y.back();
  const auto j = static_cast<std::size_t>(it - x.begin());
  const std::size_t i = j - 1;
  const double t = (at - x[i]) / (x[j] - x[i]);
  return y[i] + t * (y[j] - y[i]);
}

inline std::size_t nearest_index(const std::vector<double>& x, double at) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (std::abs(x[k] - at) < std::abs(x[best] - at)) best = k;
  }
  return best;
}

}  // namespace detail

/// Finds and measures the transparency windows of `sp`, then classifies the
/// feature at x = 0:
///  * SplitPeak      - x = 0 sits in a window that is in excess of the cavity
///                     count (the extra window splitting a central peak), or
///                     two windows inside |x| < central_band bracket a maximum;
///  * AbsorptivePeak - otherwise, Re(ε_T)(0) > width_level;
///  * AbsorptiveDip  - otherwise.
inline WindowReport detect_windows(const ResponseSpectrum& sp, const WindowThresholds& thr = {}) {
  detail::check_grid(sp);
  const auto& x = sp.x_grid;
  const std::size_t n = x.size();
  std::vector<double> mag(n), re(n);
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = std::abs(sp.eps_T[k]);
    re[k] = sp.eps_T[k].real();
  }

  WindowReport rep;
  rep.thresholds = thr;

  std::size_t k = 1;
  while (k + 1 < n) {
    std::size_t j = k;
    while (j + 1 < n && mag[j + 1] == mag[k]) ++j;
    const bool is_min = mag[k - 1] > mag[k] && j + 1 < n && mag[j + 1] > mag[k];
    if (!is_min) {
      k = j + 1;
      continue;
    }
    const double bottom = mag[k];

    // Prominence: on each side, the highest point before the curve dips
    // below this minimum (or the grid ends); the lower side sets the base.
    double left_max = bottom;
    for (std::size_t i = k; i-- > 0;) {
      if (mag[i] < bottom) break;
      left_max = std::max(left_max, mag[i]);
    }
    double right_max = bottom;
    for (std::size_t i = j + 1; i < n; ++i) {
      if (mag[i] < bottom) break;
      right_max = std::max(right_max, mag[i]);
    }
    const double prominence = std::min(left_max, right_max) - bottom;

    if (bottom < thr.max_depth && prominence >= thr.min_prominence) {
      const std::size_t c = (k + j) / 2;
      const double half = bottom + 0.5 * prominence;
      std::size_t l = k;
      while (l > 0 && mag[l - 1] <= half) --l;
      std::size_t r = j;
      while (r + 1 < n && mag[r + 1] <= half) ++r;
      if (r - l + 1 < thr.min_points) {
        throw ResolutionError("window near x/kappa_N = " + std::to_string(x[c]) + " spans only " +
                              std::to_string(r - l + 1) + " grid points");
      }
      Window w;
      w.center_x = 0.5 * (x[k] + x[j]);
      w.depth = bottom;
      w.prominence = prominence;
      std::tie(w.left_x, w.right_x) = detail::level_interval(x, re, c, thr.width_level, false);
      w.width = w.right_x - w.left_x;
      rep.windows.push_back(w);
    }
    k = j + 1;
  }
  rep.count = rep.windows.size();

  if (n == 0 || x.front() > 0.0 || x.back() < 0.0) return rep;

  const double re0 = detail::interpolate_at(x, re, 0.0);
  bool split = false;
  if (sp.n_cavities && rep.count > static_cast<std::size_t>(*sp.n_cavities) && re0 < thr.width_level) {
    for (const auto& w : rep.windows) {
      if (w.left_x <= 0.0 && 0.0 <= w.right_x) split = true;
    }
  }
  for (std::size_t w = 0; !split && w + 1 < rep.windows.size(); ++w) {
    const double a = rep.windows[w].center_x;
    const double b = rep.windows[w + 1].center_x;
    if (std::abs(a) >= thr.central_band || std::abs(b) >= thr.central_band) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (x[i] <= a || x[i] >= b) continue;
      if (re[i] > re[i - 1] && re[i] >= re[i + 1]) {
        split = true;
        break;
      }
    }
  }
  if (split) {
    rep.central_feature = CentralFeature::SplitPeak;
  } else if (re0 > thr.width_level) {
    rep.central_feature = CentralFeature::AbsorptivePeak;
  } else {
    rep.central_feature = CentralFeature::AbsorptiveDip;
  }
  return rep;
}

/// Width (units of κ_N) of the central absorptive peak, i.e. the region
/// around 0 with Re(ε_T) > width_level, or of the central dip window.
inline double central_feature_width(const ResponseSpectrum& sp, const WindowThresholds& thr = {}) {
  const WindowReport rep = detect_windows(sp, thr);
  if (!rep.central_feature) throw NotApplicableError("central_feature_width: x = 0 is not on the grid");
  if (*rep.central_feature == CentralFeature::SplitPeak) {
    throw NotApplicableError("central_feature_width: central feature is split");
  }
  std::vector<double> re(sp.eps_T.size());
  for (std::size_t k = 0; k < re.size(); ++k) re[k] = sp.eps_T[k].real();
  const bool peak = *rep.central_feature == CentralFeature::AbsorptivePeak;
  const std::size_t start = detail::nearest_index(sp.x_grid, 0.0);
  const auto [l, r] = detail::level_interval(sp.x_grid, re, start, thr.width_level, peak);
  return r - l;
}

/// Real zeros of ε_T for the lossless chain (κ_n = γ_m = γ_a = 0), in units
/// of κ_N. Each level is kept as D_k = P_k/Q_k in t = x/κ_N; ε_T vanishes
/// where D_N has a pole, i.e. at the real roots of Q_N once factors of t
/// shared with P_N (coincident mechanical and atomic poles) are removed.
inline std::vector<double> predict_windows_lossless(const NormalizedSystem& s,
                                                    const ResponseOptions& opt = {}) {
  detail::require_resolved(s, "predict_windows_lossless");
  using poly::Poly;
  const double kn = s.kappa_n();
  const Poly it{cplx{0.0, 0.0}, cplx{0.0, 1.0}};  // i·t

  auto add_pole = [&it](Poly& p, Poly& q, cplx weight) {
    if (weight == cplx{0.0, 0.0}) return;
    p = poly::add(poly::mul(p, it), poly::scale(q, weight));
    q = poly::mul(q, it);
  };
  auto strip_common_t = [](Poly& p, Poly& q) {
    const double tol = 1e-12 * std::max(poly::max_abs(p), poly::max_abs(q));
    while (p.size() > 1 && q.size() > 1 && std::abs(p.front()) <= tol && std::abs(q.front()) <= tol) {
      p.erase(p.begin());
      q.erase(q.begin());
    }
  };
  const cplx atom_w = s.has_atom() ? detail::atom_weight(s, opt) / (kn * kn) : cplx{0.0, 0.0};

  Poly p = it;
  Poly q{cplx{1.0, 0.0}};
  for (int k = 1; k <= s.n_cavities; ++k) {
    if (k == 1) {
      add_pole(p, q, std::norm(s.G) / (kn * kn));
    } else {
      const double g = s.hopping[static_cast<std::size_t>(k - 2)] / kn;
      if (g == 0.0) {
        p = it;  // decoupled: the outer chain no longer sees cavities < k
        q = {cplx{1.0, 0.0}};
      } else {
        Poly next = poly::add(poly::mul(it, p), poly::scale(q, g * g));
        q = std::move(p);
        p = std::move(next);
      }
    }
    if (s.has_atom() && s.atom->position == k) add_pole(p, q, atom_w);
    strip_common_t(p, q);
  }

  const std::vector<cplx> z = poly::roots(q);
  double root_scale = 1.0;
  for (const auto& r : z) root_scale = std::max(root_scale, std::abs(r));
  std::vector<double> real_roots;
  for (const auto& r : z) {
    if (std::abs(r.imag()) < 1e-8 * root_scale) real_roots.push_back(r.real());
  }
  std::sort(real_roots.begin(), real_roots.end());
  std::vector<double> out;
  for (double r : real_roots) {
    if (out.empty() || r - out.back() > 1e-9 * root_scale) out.push_back(r);
  }
  return out;
}

}  // namespace omit
