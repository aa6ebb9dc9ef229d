#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psmco/cost_model.hpp"
#include "psmco/random.hpp"
#include "psmco/space.hpp"
#include "psmco/weights.hpp"

namespace psmco {

/// Mixture jittering kernel: with probability 1 - epsilon a particle stays
/// put, otherwise it receives isotropic Gaussian noise of std `proposal_std`
/// and is clamped back into the search space.
class JitterKernel {
 public:
  /// Throws InvalidArgument unless 0 < epsilon <= 1/sqrt(num_particles) and
  /// proposal_std >= 0.
  JitterKernel(double epsilon, double proposal_std, SearchSpace space, std::size_t num_particles);

  /// epsilon = 1/sqrt(num_particles).
  static JitterKernel with_default_epsilon(double proposal_std, SearchSpace space,
                                           std::size_t num_particles);

  static double max_epsilon(std::size_t num_particles);

  double epsilon() const noexcept { return epsilon_; }
  double proposal_std() const noexcept { return proposal_std_; }
  const SearchSpace& space() const noexcept { return space_; }
  std::size_t num_particles() const noexcept { return num_particles_; }

 private:
  double epsilon_;
  double proposal_std_;
  SearchSpace space_;
  std::size_t num_particles_;
};

struct JitterResult {
  ParticleSet particles;
  std::size_t moved = 0;  ///< particles the kernel chose to perturb
};

struct WeightUpdate {
  LogWeightVector weights;
  double log_z_step = 0.0;  ///< log Z_t^N = logsumexp(log G) - log N
  bool degenerate = false;  ///< every log-potential was -inf
};

/// One local sampler: particles, running log marginal likelihood and the
/// sampler's own random stream.
class ParticleSystem {
 public:
  ParticleSystem(ParticleSet particles, Rng rng, std::size_t worker_id);

  const ParticleSet& particles() const noexcept { return particles_; }
  std::size_t size() const noexcept { return particles_.size(); }
  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t worker_id() const noexcept { return worker_id_; }

  /// log Z_{1:t}; -inf once any step was degenerate.
  double log_z() const noexcept { return log_z_; }
  /// log Z_k for k = 1..t, in order.
  const std::vector<double>& log_z_steps() const noexcept { return log_z_steps_; }

  Rng& rng() noexcept { return rng_; }

  /// Installs the outcome of one weight/resample cycle.
  void advance(ParticleSet particles, double log_z_step);

 private:
  ParticleSet particles_;
  Rng rng_;
  std::size_t worker_id_;
  std::size_t iteration_ = 0;
  double log_z_ = 0.0;
  std::vector<double> log_z_steps_;
};

/// N i.i.d. draws from the uniform distribution on the box.
ParticleSystem init_particles(const SearchSpace& space, std::size_t num_particles, Rng rng,
                              std::size_t worker_id = 0);

/// N draws from N(center, stddev^2 I) clamped to the box.
ParticleSystem init_particles_gaussian(const SearchSpace& space, std::size_t num_particles,
                                       std::span<const double> center, double stddev, Rng rng,
                                       std::size_t worker_id = 0);

/// Applies the kernel independently to every particle, drawing from `rng`.
JitterResult jitter(const ParticleSet& particles, const JitterKernel& kernel, Rng& rng);

/// Log-potentials of `batch` at each particle, normalized weights and the
/// incremental log marginal likelihood. A particle whose cost evaluation is
/// non-finite gets log-potential -inf. When all are -inf the update is
/// flagged degenerate and carries uniform weights with log_z_step = -inf.
WeightUpdate weight_and_accumulate(const ParticleSet& jittered, const CostModel& model,
                                   std::span<const std::size_t> batch);

/// N i.i.d. categorical draws by inverse CDF (first index whose cumulative
/// weight reaches u).
std::vector<std::size_t> sample_ancestors(std::span<const double> weights, std::size_t count,
                                          Rng& rng);

ParticleSet resample_multinomial(std::span<const double> weights, const ParticleSet& particles,
                                 Rng& rng);

/// Jitter, weight, accumulate log Z, resample. Degenerate steps skip the
/// resampling and keep the jittered particles.
void sampler_step(ParticleSystem& system, const CostModel& model,
                  std::span<const std::size_t> batch, const JitterKernel& kernel);

}  // namespace psmco
