#include "psmco/errors.hpp"

#include <sstream>

namespace psmco {

namespace {

std::string describe(std::size_t component, const std::vector<double>& theta, double value) {
  std::ostringstream os;
  os << "component " << component << " is non-finite (" << value << ") at theta = (";
  for (std::size_t j = 0; j < theta.size(); ++j) os << (j ? ", " : "") << theta[j];
  os << ")";
  return os.str();
}

}  // namespace

EvaluationError::EvaluationError(std::size_t component, std::vector<double> theta, double value)
    : std::runtime_error(describe(component, theta, value)),
      component_(component),
      theta_(std::move(theta)),
      value_(value) {}

}  // namespace psmco
