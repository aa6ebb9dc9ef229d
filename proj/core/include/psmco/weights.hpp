#pragma once

#include <span>
#include <vector>

namespace psmco {

/// log(sum_i exp(v_i)) with max subtraction. Returns -inf when every entry
/// is -inf and NaN if any entry is NaN.
double log_sum_exp(std::span<const double> values);

/// Natural-log weights and their normalized linear counterpart.
class LogWeightVector {
 public:
  LogWeightVector() = default;
  explicit LogWeightVector(std::vector<double> log_values) : log_values_(std::move(log_values)) {}

  std::size_t size() const noexcept { return log_values_.size(); }
  const std::vector<double>& log_values() const noexcept { return log_values_; }

  bool normalized() const noexcept { return !weights_.empty(); }
  /// Linear weights; empty until normalized.
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// log-sum-exp of the raw log values, cached by normalization.
  double log_total() const noexcept { return log_total_; }

 private:
  friend LogWeightVector normalize_log_weights(LogWeightVector);

  std::vector<double> log_values_;
  std::vector<double> weights_;
  double log_total_ = 0.0;
};

/// w_i = exp(l_i - logsumexp(l)). Throws InvalidArgument on empty input and
/// DegenerateWeights when no entry is finite.
LogWeightVector normalize_log_weights(LogWeightVector logw);

inline std::vector<double> normalize_log_weights(std::span<const double> log_values) {
  return normalize_log_weights(LogWeightVector({log_values.begin(), log_values.end()})).weights();
}

}  // namespace psmco
