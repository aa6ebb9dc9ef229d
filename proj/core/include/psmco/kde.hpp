#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psmco/space.hpp"

namespace psmco {

/// Isotropic Gaussian kernel k_h(u) = (2 pi h^2)^{-d/2} exp(-|u|^2 / (2 h^2)).
class KernelDensity {
 public:
  /// Throws InvalidArgument unless bandwidth > 0 and dim >= 1.
  KernelDensity(double bandwidth, std::size_t dim);

  double bandwidth() const noexcept { return bandwidth_; }
  std::size_t dim() const noexcept { return dim_; }

  /// log k_h(u) for a displacement with squared norm `sq_norm`.
  double log_kernel(double sq_norm) const noexcept { return log_norm_ - 0.5 * sq_norm * inv_h2_; }

  /// log of (1/N) sum_i k_h(theta - particle_i).
  double log_density(const ParticleSet& particles, std::span<const double> theta) const;
  double density(const ParticleSet& particles, std::span<const double> theta) const;

 private:
  double bandwidth_;
  std::size_t dim_;
  double inv_h2_;
  double log_norm_;
};

/// h = 1 / floor(N^{1/(2(d+1))}).
double bandwidth_rule(std::size_t num_particles, std::size_t dim);

struct MapEstimate {
  std::size_t index = 0;
  std::vector<double> theta;
  double log_density = 0.0;
};

/// Lowest index of the maximum; NaN scores never win.
std::size_t argmax_lowest(std::span<const double> scores);

/// Evaluates the KDE at every particle (O(N^2)) and returns the particle
/// with the highest density, lowest index on ties.
MapEstimate map_estimate(const KernelDensity& kde, const ParticleSet& particles);

}  // namespace psmco
