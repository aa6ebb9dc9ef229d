#include "psmco/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psmco/errors.hpp"
#include "psmco/kde.hpp"
#include "psmco/sampler.hpp"
#include "psmco/thread_pool.hpp"

namespace psmco {

namespace {

constexpr std::uint64_t kScheduleStream = 0;
constexpr std::uint64_t kParticleStream = 1;

ParticleSystem make_system(const SearchSpace& space, const OptimizerConfig& config,
                           std::uint64_t seed, std::size_t worker) {
  Rng rng(split_seed(seed, kParticleStream));
  if (config.init.kind == ParticleInit::Kind::gaussian)
    return init_particles_gaussian(space, config.particles, config.init.center, config.init.stddev,
                                   std::move(rng), worker);
  return init_particles(space, config.particles, std::move(rng), worker);
}

}  // namespace

void OptimizerConfig::validate(std::size_t n, std::size_t dim) const {
  if (workers == 0) throw InvalidArgument("worker count M must be positive");
  if (particles == 0) throw InvalidArgument("particle count N must be positive");
  if (batch_size == 0 || batch_size > n)
    throw InvalidArgument("mini-batch size must satisfy 1 <= K <= n");
  if (!(proposal_std >= 0.0) || !std::isfinite(proposal_std))
    throw InvalidArgument("jitter proposal std must be finite and non-negative");
  if (epsilon) {
    if (!(*epsilon > 0.0) || *epsilon > 1.0)
      throw InvalidArgument("jitter probability epsilon must lie in (0, 1]");
    if (*epsilon > JitterKernel::max_epsilon(particles) * (1.0 + 1e-12))
      throw InvalidArgument("jitter probability epsilon exceeds 1/sqrt(N)");
  }
  if (init.kind == ParticleInit::Kind::gaussian) {
    if (init.center.size() != dim)
      throw InvalidArgument("initialization center dimension does not match search space");
    if (!(init.stddev >= 0.0)) throw InvalidArgument("initialization std must be non-negative");
  }
  if (!worker_seeds.empty() && worker_seeds.size() != workers)
    throw InvalidArgument("explicit worker seeds must number exactly M");
}

double OptimizerConfig::resolved_epsilon() const {
  return epsilon.value_or(JitterKernel::max_epsilon(particles));
}

std::uint64_t worker_seed(std::uint64_t master, std::size_t worker) {
  return split_seed(master, worker);
}

MiniBatchSchedule worker_schedule(std::uint64_t seed, std::size_t n, std::size_t batch_size) {
  Rng rng(split_seed(seed, kScheduleStream));
  return build_schedule(n, batch_size, rng);
}

std::size_t select_best_worker(std::span<const double> log_z) {
  if (log_z.empty()) throw InvalidArgument("no workers to select from");
  bool found = false;
  std::size_t best = 0;
  for (std::size_t m = 0; m < log_z.size(); ++m) {
    if (!std::isfinite(log_z[m])) continue;
    if (!found || log_z[m] > log_z[best]) {
      best = m;
      found = true;
    }
  }
  if (!found) throw NoViableWorker("every worker has log marginal likelihood -inf");
  return best;
}

PsmcoResult run_psmco(const CostModel& model, const SearchSpace& space,
                      const OptimizerConfig& config) {
  if (model.dim() != space.dim())
    throw InvalidArgument("cost model and search space dimensions differ");
  config.validate(model.size(), space.dim());

  const std::size_t m_count = config.workers;
  const JitterKernel kernel(config.resolved_epsilon(), config.proposal_std, space,
                            config.particles);
  const KernelDensity kde(bandwidth_rule(config.particles, space.dim()), space.dim());

  std::vector<MiniBatchSchedule> schedules;
  std::vector<ParticleSystem> systems;
  schedules.reserve(m_count);
  systems.reserve(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    const std::uint64_t seed =
        config.worker_seeds.empty() ? worker_seed(config.seed, m) : config.worker_seeds[m];
    schedules.push_back(worker_schedule(seed, model.size(), config.batch_size));
    systems.push_back(make_system(space, config, seed, m));
  }

  const std::size_t total = schedules.front().num_batches();
  const std::size_t stride = config.estimate_every == 0 ? total : config.estimate_every;

  PsmcoResult result;
  result.iterations = total;
  ThreadPool pool(config.threads);

  auto collect_steps = [&] {
    result.log_z_steps.clear();
    for (const auto& s : systems) result.log_z_steps.push_back(s.log_z_steps());
  };

  std::size_t done = 0;
  while (done < total) {
    const std::size_t until = std::min(total, (done / stride + 1) * stride);
    pool.parallel_for(m_count, [&](std::size_t m) {
      for (std::size_t t = done; t < until; ++t)
        sampler_step(systems[m], model, schedules[m].batch(t), kernel);
    });
    done = until;

    TraceRow row;
    row.log_z.reserve(m_count);
    for (const auto& s : systems) row.log_z.push_back(s.log_z());
    std::size_t best = 0;
    try {
      best = select_best_worker(row.log_z);
    } catch (const NoViableWorker& e) {
      collect_steps();
      throw RunFailure(std::string(e.what()) + " at iteration " + std::to_string(done),
                       std::move(result));
    }
    const auto map = map_estimate(kde, systems[best].particles());
    row.estimate = {map.theta, best, done, row.log_z[best], total_cost(model, map.theta)};
    result.rows.push_back(std::move(row));
  }

  result.final_estimate = result.rows.back().estimate;
  collect_steps();
  if (config.keep_final_particles)
    for (const auto& s : systems) result.final_particles.push_back(s.particles());
  return result;
}

}  // namespace psmco
