#pragma once

#include <stdexcept>
#include <string>

namespace tmfg {

/// Bad argument or configuration: wrong grid size, k = 0, t < 0, mismatched grids.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Density vanishes (or nearly) on too many nodes for log-based functionals.
class DegenerateDensity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative solve stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// Time marching produced values outside the admissible range.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Malformed file contents; line is 1-based, 0 when not applicable.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace tmfg
