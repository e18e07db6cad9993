#pragma once

#include <complex>
#include <vector>

namespace omit {

/// Mean-field fixed point of the pumped chain (probe switched off).
struct SteadyState {
  std::vector<std::complex<double>> c_bar;  // cavity amplitudes c̄_1..c̄_N
  double lambda_bar = 0.0;                  // b̄ + b̄*
  std::complex<double> sigma_minus_bar{0.0, 0.0};
  std::complex<double> sigma_z_bar{-1.0, 0.0};
  double residual_norm = 0.0;  // max steady-equation residual relative to |ε_c|
  int iterations = 0;
};

}  // namespace omit
