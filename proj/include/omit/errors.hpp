#pragma once

#include <stdexcept>
#include <string>

namespace omit {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Drive-mode normalization was requested without a steady state.
class MissingDependencyError : public Error {
 public:
  using Error::Error;
};

/// A linear system has no unique solution (lossless input sitting on a pole).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// Invalid integrator settings (step size too large, empty interval).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// The integrated state became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time_us) : Error(what), time_us_(time_us) {}
  double time_us() const noexcept { return time_us_; }

 private:
  double time_us_;
};

/// Demodulation window shorter than requested.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// Spectrum grid too coarse to resolve a transparency window.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class NotApplicableError : public Error {
 public:
  using Error::Error;
};

/// Failure at one grid point of a spectrum; carries the offending detuning.
class SpectrumPointError : public Error {
 public:
  SpectrumPointError(const std::string& what, double x_over_kappa_n)
      : Error(what), x_(x_over_kappa_n) {}
  double x_over_kappa_n() const noexcept { return x_; }

 private:
  double x_;
};

}  // namespace omit
