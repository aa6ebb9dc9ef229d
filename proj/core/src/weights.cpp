#include "psmco/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psmco/errors.hpp"

namespace psmco {

double log_sum_exp(std::span<const double> values) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double max = kNegInf;
  for (double v : values) {
    if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
    max = std::max(max, v);
  }
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

LogWeightVector normalize_log_weights(LogWeightVector logw) {
  const auto& values = logw.log_values_;
  if (values.empty()) throw InvalidArgument("cannot normalize an empty weight vector");
  for (double v : values) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw DegenerateWeights("log-weights contain NaN or +inf");
  }
  // Scale by the maximum, then divide: exact for equal entries at any offset.
  const double max = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max)) throw DegenerateWeights("all log-weights are -inf");

  logw.weights_.resize(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += logw.weights_[i] = std::exp(values[i] - max);
  for (double& w : logw.weights_) w /= sum;
  logw.log_total_ = max + std::log(sum);
  return logw;
}

}  // namespace psmco
