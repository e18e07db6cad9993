#pragma once

// Dense complex polynomials, ascending coefficients: p[k] multiplies x^k.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace omit::poly {

using cplx = std::complex<double>;
using Poly = std::vector<cplx>;

inline Poly add(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) r[k] += b[k];
  return r;
}

inline Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

inline Poly scale(const Poly& a, cplx s) {
  Poly r(a);
  for (auto& c : r) c *= s;
  return r;
}

inline double max_abs(const Poly& a) {
  double m = 0.0;
  for (const auto& c : a) m = std::max(m, std::abs(c));
  return m;
}

/// Drops negligible leading coefficients.
inline Poly trimmed(Poly a, double rel = 1e-14) {
  const double tol = rel * max_abs(a);
  while (a.size() > 1 && std::abs(a.back()) <= tol) a.pop_back();
  return a;
}

inline cplx eval(const Poly& a, cplx x) {
  cplx r{0.0, 0.0};
  for (auto it = a.rbegin(); it != a.rend(); ++it) r = r * x + *it;
  return r;
}

inline Poly derivative(const Poly& a) {
  if (a.size() <= 1) return {cplx{0.0, 0.0}};
  Poly d(a.size() - 1);
  for (std::size_t k = 1; k < a.size(); ++k) d[k - 1] = static_cast<double>(k) * a[k];
  return d;
}

/// All complex roots: eigenvalues of the companion matrix of the monic
/// polynomial, each refined by a few Newton steps.
inline std::vector<cplx> roots(const Poly& p_in) {
  const Poly p = trimmed(p_in);
  const std::size_t deg = p.size() - 1;
  if (deg == 0) return {};

  const cplx lead = p.back();
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(deg),
                                                      static_cast<Eigen::Index>(deg));
  for (std::size_t k = 0; k < deg; ++k) {
    companion(0, static_cast<Eigen::Index>(deg - 1 - k)) = -p[k] / lead;
  }
  for (std::size_t k = 1; k < deg; ++k) {
    companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  const Poly dp = derivative(p);

  std::vector<cplx> out;
  out.reserve(deg);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    cplx z = es.eigenvalues()(k);
    for (int it = 0; it < 3; ++it) {
      const cplx d = eval(dp, z);
      if (d == cplx{0.0, 0.0}) break;
      const cplx step = eval(p, z) / d;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      z -= step;
    }
    out.push_back(z);
  }
  return out;
}

}  // namespace omit::poly
