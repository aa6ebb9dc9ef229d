#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace psmco {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A cost component returned a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t component, std::vector<double> theta, double value);

  std::size_t component() const noexcept { return component_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t component_;
  std::vector<double> theta_;
  double value_;
};

/// Every log-weight is -inf (or NaN); no normalization exists.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Selection over workers found no finite marginal likelihood.
class NoViableWorker : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace psmco
