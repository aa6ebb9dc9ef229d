#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "psmco/kde.hpp"
#include "psmco/problems.hpp"
#include "psmco/sampler.hpp"
#include "psmco/schedule.hpp"

namespace {

using namespace psmco;

void BM_LogPotentialSigmoid(benchmark::State& state) {
  SigmoidProblemSpec spec;
  spec.n = static_cast<std::size_t>(state.range(0));
  const SigmoidProblem problem(spec);
  std::vector<std::size_t> batch(problem.size());
  std::iota(batch.begin(), batch.end(), 0);
  const std::vector<double> theta{0.5, -1.5};
  for (auto _ : state) benchmark::DoNotOptimize(log_potential(problem, batch, theta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogPotentialSigmoid)->Arg(100)->Arg(10000);

void BM_LogPotentialMixture(benchmark::State& state) {
  const MixtureProblem problem{MixtureProblemSpec{}};
  std::vector<std::size_t> batch(problem.size());
  std::iota(batch.begin(), batch.end(), 0);
  const std::vector<double> theta{3.0, -2.0};
  for (auto _ : state) benchmark::DoNotOptimize(log_potential(problem, batch, theta));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(problem.size()));
}
BENCHMARK(BM_LogPotentialMixture);

void BM_SamplerStepMixture(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MixtureProblem problem{MixtureProblemSpec{}};
  const auto box = SearchSpace::cube(2, -50.0, 50.0);
  const auto kernel = JitterKernel::with_default_epsilon(0.7, box, n);
  auto ps = init_particles(box, n, Rng(1));
  Rng rng(2);
  const auto schedule = build_schedule(problem.size(), 1, rng);
  std::size_t t = 0;
  for (auto _ : state) {
    sampler_step(ps, problem, schedule.batch(t), kernel);
    t = (t + 1) % schedule.num_batches();
  }
}
BENCHMARK(BM_SamplerStepMixture)->Arg(50)->Arg(1000);

void BM_MapEstimate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ps = init_particles(SearchSpace::cube(2, -5.0, 5.0), n, Rng(3));
  const KernelDensity kde(bandwidth_rule(n, 2), 2);
  for (auto _ : state) benchmark::DoNotOptimize(map_estimate(kde, ps.particles()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MapEstimate)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

}  // namespace
BENCHMARK_MAIN();
