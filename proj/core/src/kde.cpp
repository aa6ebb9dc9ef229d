#include "psmco/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "psmco/errors.hpp"
#include "psmco/weights.hpp"

namespace psmco {

KernelDensity::KernelDensity(double bandwidth, std::size_t dim)
    : bandwidth_(bandwidth), dim_(dim) {
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    throw InvalidArgument("kernel bandwidth must be positive");
  if (dim_ == 0) throw InvalidArgument("kernel dimension must be positive");
  inv_h2_ = 1.0 / (bandwidth_ * bandwidth_);
  log_norm_ = -0.5 * static_cast<double>(dim_) *
              std::log(2.0 * std::numbers::pi * bandwidth_ * bandwidth_);
}

double KernelDensity::log_density(const ParticleSet& particles,
                                  std::span<const double> theta) const {
  const std::size_t n = particles.size();
  if (n == 0) throw InvalidArgument("kernel density needs at least one particle");
  if (particles.dim() != dim_ || theta.size() != dim_)
    throw InvalidArgument("kernel density dimension mismatch");
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = particles[i];
    double sq = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double diff = theta[j] - p[j];
      sq += diff * diff;
    }
    terms[i] = log_kernel(sq);
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(n));
}

double KernelDensity::density(const ParticleSet& particles, std::span<const double> theta) const {
  return std::exp(log_density(particles, theta));
}

double bandwidth_rule(std::size_t num_particles, std::size_t dim) {
  if (num_particles == 0 || dim == 0) throw InvalidArgument("bandwidth rule needs N, d >= 1");
  const double exponent = 1.0 / (2.0 * static_cast<double>(dim + 1));
  double root = std::floor(std::pow(static_cast<double>(num_particles), exponent));
  // pow can land just below an exact integer root (64^(1/6) -> 1.9999...).
  const double power = 2.0 * static_cast<double>(dim + 1);
  const auto n = static_cast<double>(num_particles);
  if (std::pow(root + 1.0, power) <= n) root += 1.0;
  if (root > 1.0 && std::pow(root, power) > n) root -= 1.0;
  return 1.0 / std::max(root, 1.0);
}

std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("argmax of an empty range");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) continue;
    if (!found || scores[i] > best_value) {
      best = i;
      best_value = scores[i];
      found = true;
    }
  }
  return best;
}

MapEstimate map_estimate(const KernelDensity& kde, const ParticleSet& particles) {
  const std::size_t n = particles.size();
  if (n == 0) throw InvalidArgument("MAP estimate needs at least one particle");
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = kde.log_density(particles, particles[i]);
  const std::size_t best = argmax_lowest(scores);
  const auto p = particles[best];
  return {best, {p.begin(), p.end()}, scores[best]};
}

}  // namespace psmco
