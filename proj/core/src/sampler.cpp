#include "psmco/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psmco/errors.hpp"

namespace psmco {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Slack for epsilon == 1/sqrt(N) written out and read back as decimal text.
constexpr double kEpsilonSlack = 1e-12;

}  // namespace

JitterKernel::JitterKernel(double epsilon, double proposal_std, SearchSpace space,
                           std::size_t num_particles)
    : epsilon_(epsilon),
      proposal_std_(proposal_std),
      space_(std::move(space)),
      num_particles_(num_particles) {
  if (num_particles_ == 0) throw InvalidArgument("jitter kernel needs N >= 1");
  if (!(epsilon_ > 0.0) || epsilon_ > 1.0)
    throw InvalidArgument("jitter probability epsilon must lie in (0, 1]");
  if (epsilon_ > max_epsilon(num_particles_) * (1.0 + kEpsilonSlack))
    throw InvalidArgument("jitter probability epsilon exceeds 1/sqrt(N)");
  if (!(proposal_std_ >= 0.0) || !std::isfinite(proposal_std_))
    throw InvalidArgument("jitter proposal std must be finite and non-negative");
}

JitterKernel JitterKernel::with_default_epsilon(double proposal_std, SearchSpace space,
                                                std::size_t num_particles) {
  return JitterKernel(max_epsilon(std::max<std::size_t>(num_particles, 1)), proposal_std,
                      std::move(space), num_particles);
}

double JitterKernel::max_epsilon(std::size_t num_particles) {
  return 1.0 / std::sqrt(static_cast<double>(num_particles));
}

ParticleSystem::ParticleSystem(ParticleSet particles, Rng rng, std::size_t worker_id)
    : particles_(std::move(particles)), rng_(std::move(rng)), worker_id_(worker_id) {
  if (particles_.empty()) throw InvalidArgument("particle system needs N >= 1");
}

void ParticleSystem::advance(ParticleSet particles, double log_z_step) {
  particles_ = std::move(particles);
  ++iteration_;
  log_z_steps_.push_back(log_z_step);
  log_z_ += log_z_step;
}

ParticleSystem init_particles(const SearchSpace& space, std::size_t num_particles, Rng rng,
                              std::size_t worker_id) {
  if (num_particles == 0) throw InvalidArgument("particle count must be positive");
  const std::size_t d = space.dim();
  ParticleSet set(num_particles, d);
  for (std::size_t i = 0; i < num_particles; ++i) {
    auto p = set[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double lo = space.lower()[j];
      const double hi = space.upper()[j];
      p[j] = std::min(hi, lo + (hi - lo) * uniform01(rng));
    }
  }
  return ParticleSystem(std::move(set), std::move(rng), worker_id);
}

ParticleSystem init_particles_gaussian(const SearchSpace& space, std::size_t num_particles,
                                       std::span<const double> center, double stddev, Rng rng,
                                       std::size_t worker_id) {
  if (num_particles == 0) throw InvalidArgument("particle count must be positive");
  if (center.size() != space.dim())
    throw InvalidArgument("initialization center dimension does not match search space");
  if (!(stddev >= 0.0)) throw InvalidArgument("initialization std must be non-negative");
  const std::size_t d = space.dim();
  ParticleSet set(num_particles, d);
  for (std::size_t i = 0; i < num_particles; ++i) {
    auto p = set[i];
    for (std::size_t j = 0; j < d; ++j) p[j] = center[j] + stddev * standard_normal(rng);
    space.clip_in_place(p);
  }
  return ParticleSystem(std::move(set), std::move(rng), worker_id);
}

JitterResult jitter(const ParticleSet& particles, const JitterKernel& kernel, Rng& rng) {
  if (particles.dim() != kernel.space().dim())
    throw InvalidArgument("particle dimension does not match jitter kernel space");
  JitterResult result{particles, 0};
  const double eps = kernel.epsilon();
  const double sd = kernel.proposal_std();
  for (std::size_t i = 0; i < result.particles.size(); ++i) {
    if (uniform01(rng) >= eps) continue;
    auto p = result.particles[i];
    for (double& x : p) x += sd * standard_normal(rng);
    kernel.space().clip_in_place(p);
    ++result.moved;
  }
  return result;
}

WeightUpdate weight_and_accumulate(const ParticleSet& jittered, const CostModel& model,
                                   std::span<const std::size_t> batch) {
  const std::size_t n = jittered.size();
  if (n == 0) throw InvalidArgument("cannot weight an empty particle set");
  std::vector<double> log_g(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      log_g[i] = log_potential(model, batch, jittered[i]);
    } catch (const EvaluationError&) {
      log_g[i] = kNegInf;
    }
  }

  WeightUpdate update;
  try {
    update.weights = normalize_log_weights(LogWeightVector(log_g));
    update.log_z_step = update.weights.log_total() - std::log(static_cast<double>(n));
  } catch (const DegenerateWeights&) {
    const double uniform = -std::log(static_cast<double>(n));
    update.weights = normalize_log_weights(LogWeightVector(std::vector<double>(n, uniform)));
    update.log_z_step = kNegInf;
    update.degenerate = true;
  }
  return update;
}

std::vector<std::size_t> sample_ancestors(std::span<const double> weights, std::size_t count,
                                          Rng& rng) {
  if (weights.empty()) throw InvalidArgument("cannot resample from empty weights");
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  std::vector<std::size_t> ancestors(count);
  for (auto& a : ancestors) {
    const double u = uniform01(rng) * acc;
    // First index whose cumulative weight reaches u; zero-weight prefixes
    // cannot be hit because u is compared with >=.
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    while (it != cdf.end() && weights[static_cast<std::size_t>(it - cdf.begin())] <= 0.0) ++it;
    if (it == cdf.end()) it = std::prev(cdf.end());
    a = static_cast<std::size_t>(it - cdf.begin());
  }
  return ancestors;
}

ParticleSet resample_multinomial(std::span<const double> weights, const ParticleSet& particles,
                                 Rng& rng) {
  if (weights.size() != particles.size())
    throw InvalidArgument("weight count does not match particle count");
  const auto ancestors = sample_ancestors(weights, particles.size(), rng);
  ParticleSet out(particles.size(), particles.dim());
  for (std::size_t i = 0; i < ancestors.size(); ++i) {
    const auto src = particles[ancestors[i]];
    std::copy(src.begin(), src.end(), out[i].begin());
  }
  return out;
}

void sampler_step(ParticleSystem& system, const CostModel& model,
                  std::span<const std::size_t> batch, const JitterKernel& kernel) {
  auto jittered = jitter(system.particles(), kernel, system.rng());
  const auto update = weight_and_accumulate(jittered.particles, model, batch);
  if (update.degenerate) {
    system.advance(std::move(jittered.particles), update.log_z_step);
    return;
  }
  auto resampled = resample_multinomial(update.weights.weights(), jittered.particles, system.rng());
  system.advance(std::move(resampled), update.log_z_step);
}

}  // namespace psmco
