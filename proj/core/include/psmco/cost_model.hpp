#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace psmco {

/// Finite-sum cost f(theta) = sum_i f_i(theta). Implementations must be
/// deterministic in (i, theta) and safe for concurrent const use.
class CostModel {
 public:
  virtual ~CostModel() = default;

  /// Number of components n.
  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;

  /// f_i(theta), with i 0-based.
  virtual double component(std::size_t i, std::span<const double> theta) const = 0;

  /// First-order models only; used by the gradient baseline.
  virtual bool has_gradient() const { return false; }
  /// Adds grad f_i(theta) into `grad`.
  virtual void accumulate_gradient(std::size_t i, std::span<const double> theta,
                                   std::span<double> grad) const;
};

/// Adapter for closures; mostly useful for tests and small experiments.
class FunctionCostModel final : public CostModel {
 public:
  using Component = std::function<double(std::size_t, std::span<const double>)>;

  FunctionCostModel(std::size_t n, std::size_t dim, Component component);

  std::size_t size() const override { return n_; }
  std::size_t dim() const override { return dim_; }
  double component(std::size_t i, std::span<const double> theta) const override {
    return component_(i, theta);
  }

 private:
  std::size_t n_;
  std::size_t dim_;
  Component component_;
};

/// log G(theta) = -sum_{i in batch} f_i(theta), accumulated in index order.
/// Throws EvaluationError on the first non-finite component value.
double log_potential(const CostModel& model, std::span<const std::size_t> batch,
                     std::span<const double> theta);

/// f(theta) over all n components.
double total_cost(const CostModel& model, std::span<const double> theta);

}  // namespace psmco
