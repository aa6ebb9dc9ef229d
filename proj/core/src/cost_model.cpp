#include "psmco/cost_model.hpp"

#include <cmath>

#include "psmco/errors.hpp"

namespace psmco {

void CostModel::accumulate_gradient(std::size_t, std::span<const double>, std::span<double>) const {
  throw InvalidArgument("cost model does not provide gradients");
}

FunctionCostModel::FunctionCostModel(std::size_t n, std::size_t dim, Component component)
    : n_(n), dim_(dim), component_(std::move(component)) {
  if (n_ == 0) throw InvalidArgument("cost model needs at least one component");
  if (!component_) throw InvalidArgument("cost model component is empty");
}

double log_potential(const CostModel& model, std::span<const std::size_t> batch,
                     std::span<const double> theta) {
  double sum = 0.0;
  for (std::size_t i : batch) {
    const double value = model.component(i, theta);
    if (!std::isfinite(value)) throw EvaluationError(i, {theta.begin(), theta.end()}, value);
    sum += value;
  }
  return -sum;
}

double total_cost(const CostModel& model, std::span<const double> theta) {
  double sum = 0.0;
  for (std::size_t i = 0, n = model.size(); i < n; ++i) sum += model.component(i, theta);
  return sum;
}

}  // namespace psmco
