#pragma once

#include <stdexcept>
#include <string>

namespace tmscat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration, unusable grid, off-grid direction.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A staggered lattice point lies inside the exclusion band around |p| = k.
class GridResonanceError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Failure of a numerical stage (singular solve, step-size collapse, NaN).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NearSingularError : public NumericalError {
 public:
  NearSingularError(const std::string& what, double sigma_min, double condition)
      : NumericalError(what), sigma_min_(sigma_min), condition_(condition) {}
  double sigma_min() const noexcept { return sigma_min_; }
  double condition() const noexcept { return condition_; }

 private:
  double sigma_min_;
  double condition_;
};

class StepUnderflowError : public NumericalError {
 public:
  StepUnderflowError(const std::string& what, double x, double shell)
      : NumericalError(what), x_(x), shell_(shell) {}
  double x() const noexcept { return x_; }
  /// |p| of the grid point carrying the largest local error estimate.
  double shell() const noexcept { return shell_; }

 private:
  double x_;
  double shell_;
};

class NonFiniteError : public NumericalError {
 public:
  NonFiniteError(const std::string& what, double x) : NumericalError(what), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

}  // namespace tmscat
