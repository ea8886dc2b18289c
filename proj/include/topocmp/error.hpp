#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace topocmp {

// Bad input to an operation: wrong sizes, out-of-range parameters, empty data.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but outside what is implemented (e.g. a 3-D grid).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A ratio with a zero denominator.
class UndefinedRatioError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The RST conditional density cannot be normalized (collapsed diagram,
// zero-width box, underflowing partition function).
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Optimizer did not reach joint stationarity. Carries the best iterate seen.
class FitFailedError : public std::runtime_error {
 public:
  FitFailedError(const std::string& what, double alpha, std::vector<double> theta,
                 double log_pl)
      : std::runtime_error(what), alpha_(alpha), theta_(std::move(theta)),
        log_pl_(log_pl) {}

  double alpha() const noexcept { return alpha_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  double log_pl() const noexcept { return log_pl_; }

 private:
  double alpha_;
  std::vector<double> theta_;
  double log_pl_;
};

// Observed information at the optimum is not invertible / not positive definite.
class VarianceUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file is missing required columns.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace topocmp
