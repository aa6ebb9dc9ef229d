#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "psmco/cost_model.hpp"
#include "psmco/errors.hpp"
#include "psmco/sampler.hpp"
#include "psmco/schedule.hpp"

namespace {

using namespace psmco;

constexpr double kInf = std::numeric_limits<double>::infinity();

FunctionCostModel zero_model(std::size_t n, std::size_t dim) {
  return FunctionCostModel(n, dim, [](std::size_t, std::span<const double>) { return 0.0; });
}

// Particles at given 1-D positions.
ParticleSet line(std::vector<double> xs) { return ParticleSet(1, std::move(xs)); }

// ---------------------------------------------------------------------------
// init_particles

TEST(InitParticles, DegenerateBoxRejected) {
  EXPECT_THROW(init_particles(SearchSpace({0.0, 0.0}, {0.0, 0.0}), 1, Rng(1)), InvalidArgument);
}

TEST(InitParticles, ZeroParticlesRejected) {
  EXPECT_THROW(init_particles(SearchSpace::cube(2, -1, 1), 0, Rng(1)), InvalidArgument);
}

TEST(InitParticles, CoordinateMeansNearCentre) {
  const auto box = SearchSpace::cube(2, -50.0, 50.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ps = init_particles(box, 1000, Rng(seed));
    ASSERT_EQ(ps.size(), 1000u);
    EXPECT_EQ(ps.iteration(), 0u);
    EXPECT_EQ(ps.log_z(), 0.0);
    for (std::size_t j = 0; j < 2; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < ps.size(); ++i) mean += ps.particles()[i][j];
      mean /= 1000.0;
      EXPECT_LT(std::abs(mean), 5.0) << "seed " << seed << " coord " << j;
    }
  }
}

TEST(InitParticles, ParticlesInsideBox) {
  const SearchSpace box({-3.0, 10.0}, {-2.0, 10.5});
  const auto ps = init_particles(box, 2, Rng(8));
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_TRUE(box.contains(ps.particles()[i]));
}

TEST(InitParticles, GaussianInitIsClipped) {
  const auto box = SearchSpace::cube(2, -1.0, 1.0);
  const std::vector<double> center{0.9, -0.9};
  const auto ps = init_particles_gaussian(box, 500, center, 5.0, Rng(3));
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_TRUE(box.contains(ps.particles()[i]));
}

// ---------------------------------------------------------------------------
// JitterKernel / jitter

TEST(JitterKernel, EpsilonMustBePositive) {
  EXPECT_THROW(JitterKernel(0.0, 1.0, SearchSpace::cube(1, -1, 1), 4), InvalidArgument);
  EXPECT_THROW(JitterKernel(-0.1, 1.0, SearchSpace::cube(1, -1, 1), 4), InvalidArgument);
}

TEST(JitterKernel, EpsilonCappedByParticleCount) {
  const auto box = SearchSpace::cube(1, -1, 1);
  EXPECT_NO_THROW(JitterKernel(0.5, 1.0, box, 4));
  EXPECT_THROW(JitterKernel(0.51, 1.0, box, 4), InvalidArgument);
  EXPECT_THROW(JitterKernel(0.0101, 1.0, box, 10000), InvalidArgument);
  EXPECT_DOUBLE_EQ(JitterKernel::with_default_epsilon(1.0, box, 10000).epsilon(), 0.01);
}

TEST(JitterKernel, NegativeStdRejected) {
  EXPECT_THROW(JitterKernel(0.1, -1.0, SearchSpace::cube(1, -1, 1), 4), InvalidArgument);
}

TEST(Jitter, MovedCountMatchesBinomialBand) {
  const auto box = SearchSpace::cube(2, -50.0, 50.0);
  const auto kernel = JitterKernel::with_default_epsilon(1.0, box, 10000);
  auto ps = init_particles(box, 10000, Rng(17));
  Rng rng(99);
  for (int pass = 0; pass < 20; ++pass) {
    const auto r = jitter(ps.particles(), kernel, rng);
    EXPECT_GE(r.moved, 50u);
    EXPECT_LE(r.moved, 150u);
    // moved count agrees with the particles that actually changed (a
    // non-zero Gaussian perturbation changes at least one coordinate).
    std::size_t changed = 0;
    for (std::size_t i = 0; i < r.particles.size(); ++i)
      if (r.particles[i][0] != ps.particles()[i][0] || r.particles[i][1] != ps.particles()[i][1])
        ++changed;
    EXPECT_EQ(changed, r.moved);
  }
}

TEST(Jitter, ZeroStdLeavesParticlesUnchanged) {
  const auto box = SearchSpace::cube(2, -1.0, 1.0);
  const auto kernel = JitterKernel(0.5, 0.0, box, 4);
  const auto ps = init_particles(box, 4, Rng(5));
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) EXPECT_EQ(jitter(ps.particles(), kernel, rng).particles, ps.particles());
}

TEST(Jitter, StaysInsideBoxUnderHugeNoise) {
  const auto box = SearchSpace::cube(2, -1.0, 1.0);
  const auto kernel = JitterKernel::with_default_epsilon(1e6, box, 100);
  auto ps = init_particles(box, 100, Rng(7));
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const auto r = jitter(ps.particles(), kernel, rng);
    for (std::size_t i = 0; i < r.particles.size(); ++i) ASSERT_TRUE(box.contains(r.particles[i]));
  }
}

// ---------------------------------------------------------------------------
// weight_and_accumulate

TEST(WeightAndAccumulate, ConstantPotentialGivesUniformWeights) {
  FunctionCostModel model(3, 1, [](std::size_t, std::span<const double>) { return 1.5; });
  const std::vector<std::size_t> batch{0, 1};
  const auto u = weight_and_accumulate(line({0.1, 0.2, 0.3, 0.4, 0.5}), model, batch);
  for (double w : u.weights.weights()) EXPECT_DOUBLE_EQ(w, 0.2);
  EXPECT_NEAR(u.log_z_step, -3.0, 1e-15);
  EXPECT_FALSE(u.degenerate);
}

TEST(WeightAndAccumulate, HandComputedTwoParticles) {
  // f(x) = -log(x) so the log-potentials at x = 1, 3 are log 1 and log 3.
  FunctionCostModel model(1, 1, [](std::size_t, std::span<const double> t) { return -std::log(t[0]); });
  const std::vector<std::size_t> batch{0};
  const auto u = weight_and_accumulate(line({1.0, 3.0}), model, batch);
  EXPECT_NEAR(u.weights.weights()[0], 0.25, 1e-15);
  EXPECT_NEAR(u.weights.weights()[1], 0.75, 1e-15);
  EXPECT_NEAR(u.log_z_step, std::log(2.0), 1e-15);
}

TEST(WeightAndAccumulate, EmptyBatchIsNeutral) {
  const auto model = zero_model(4, 1);
  const auto u = weight_and_accumulate(line({0.0, 1.0, 2.0}), model, {});
  for (double w : u.weights.weights()) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
  EXPECT_EQ(u.log_z_step, 0.0);
}

TEST(WeightAndAccumulate, NonFiniteCostBecomesZeroWeight) {
  FunctionCostModel model(1, 1, [](std::size_t, std::span<const double> t) {
    return t[0] < 0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  });
  const std::vector<std::size_t> batch{0};
  const auto u = weight_and_accumulate(line({-1.0, 1.0}), model, batch);
  EXPECT_EQ(u.weights.weights()[0], 0.0);
  EXPECT_EQ(u.weights.weights()[1], 1.0);
  EXPECT_NEAR(u.log_z_step, -std::log(2.0), 1e-15);
}

TEST(WeightAndAccumulate, AllInfiniteFallsBackToUniform) {
  FunctionCostModel model(1, 1, [](std::size_t, std::span<const double>) { return kInf; });
  const std::vector<std::size_t> batch{0};
  const auto u = weight_and_accumulate(line({0.0, 1.0}), model, batch);
  EXPECT_TRUE(u.degenerate);
  EXPECT_EQ(u.log_z_step, -kInf);
  EXPECT_DOUBLE_EQ(u.weights.weights()[0], 0.5);
}

// ---------------------------------------------------------------------------
// resampling

TEST(Resample, PointMassCopiesThatParticle) {
  Rng rng(1);
  const auto out = resample_multinomial(std::vector{1.0, 0.0, 0.0, 0.0}, line({7.0, 1.0, 2.0, 3.0}), rng);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i][0], 7.0);
}

TEST(Resample, PointMassNotFirst) {
  Rng rng(2);
  const auto anc = sample_ancestors(std::vector{0.0, 0.0, 1.0}, 1000, rng);
  for (auto a : anc) EXPECT_EQ(a, 2u);
}

TEST(Resample, UniformWeightsExpectedCountOne) {
  Rng rng(3);
  const std::vector<double> w(4, 0.25);
  std::vector<double> counts(4, 0.0);
  const int reps = 10000;
  for (int r = 0; r < reps; ++r)
    for (auto a : sample_ancestors(w, 4, rng)) counts[a] += 1.0;
  for (double c : counts) EXPECT_NEAR(c / reps, 1.0, 0.05);
}

TEST(Resample, FrequencyOfHeavyAncestor) {
  Rng rng(4);
  const auto anc = sample_ancestors(std::vector{0.25, 0.75}, 100000, rng);
  const double freq =
      static_cast<double>(std::count(anc.begin(), anc.end(), std::size_t{1})) / 100000.0;
  EXPECT_GE(freq, 0.74);
  EXPECT_LE(freq, 0.76);
}

TEST(Resample, MeanCountsUnbiased) {
  Rng rng(5);
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const std::size_t n = w.size();
  const int reps = 10000;
  std::vector<double> counts(n, 0.0);
  for (int r = 0; r < reps; ++r)
    for (auto a : sample_ancestors(w, n, rng)) counts[a] += 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double se = oracle::binomial_sd(static_cast<double>(n), w[i]) / std::sqrt(reps);
    EXPECT_NEAR(counts[i] / reps, static_cast<double>(n) * w[i], 3.0 * se) << "ancestor " << i;
  }
}

// ---------------------------------------------------------------------------
// sampler_step

TEST(SamplerStep, TelescopingExact) {
  FunctionCostModel model(30, 2, [](std::size_t i, std::span<const double> t) {
    return 0.01 * static_cast<double>(i % 5 + 1) * (t[0] * t[0] + t[1] * t[1]);
  });
  const auto box = SearchSpace::cube(2, -5.0, 5.0);
  const auto kernel = JitterKernel::with_default_epsilon(0.5, box, 64);
  auto ps = init_particles(box, 64, Rng(21));
  Rng srng(22);
  const auto schedule = build_schedule(30, 4, srng);
  for (std::size_t t = 0; t < schedule.num_batches(); ++t) {
    sampler_step(ps, model, schedule.batch(t), kernel);
    for (std::size_t i = 0; i < ps.size(); ++i) ASSERT_TRUE(box.contains(ps.particles()[i]));
  }
  EXPECT_EQ(ps.iteration(), schedule.num_batches());
  ASSERT_EQ(ps.log_z_steps().size(), schedule.num_batches());
  double sum = 0.0;
  for (double z : ps.log_z_steps()) sum += z;
  EXPECT_EQ(ps.log_z(), sum);
  EXPECT_LT(ps.log_z(), 0.0);
}

TEST(SamplerStep, SingleParticleKeepsJitteredValue) {
  FunctionCostModel model(1, 1, [](std::size_t, std::span<const double> t) { return 3.0 * t[0]; });
  const auto box = SearchSpace::cube(1, -10.0, 10.0);
  const auto kernel = JitterKernel(1.0, 2.0, box, 1);
  auto ps = init_particles(box, 1, Rng(30));
  Rng mirror = ps.rng();
  const auto expected = jitter(ps.particles(), kernel, mirror).particles;
  const std::vector<std::size_t> batch{0};
  sampler_step(ps, model, batch, kernel);
  EXPECT_EQ(ps.particles(), expected);
  EXPECT_NEAR(ps.log_z(), -3.0 * expected[0][0], 1e-12);
}

TEST(SamplerStep, ConstantCostLeavesLogZAtZero) {
  const auto model = zero_model(10, 2);
  const auto box = SearchSpace::cube(2, -1.0, 1.0);
  const auto kernel = JitterKernel::with_default_epsilon(0.1, box, 25);
  auto ps = init_particles(box, 25, Rng(40));
  const std::vector<std::size_t> batch{3, 7};
  for (int t = 0; t < 20; ++t) sampler_step(ps, model, batch, kernel);
  EXPECT_EQ(ps.log_z(), 0.0);
}

TEST(SamplerStep, ConstantCostPreservesUniformLaw) {
  // Neutral potentials: resampling an i.i.d. uniform set gives uniform
  // marginals, so the pooled mean of x stays centred and the variance stays
  // (b - a)^2 / 12.
  const auto model = zero_model(1, 1);
  const auto box = SearchSpace::cube(1, 0.0, 1.0);
  const auto kernel = JitterKernel::with_default_epsilon(0.0, box, 50);
  const std::vector<std::size_t> batch{0};
  double mean = 0.0, sq = 0.0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    auto ps = init_particles(box, 50, Rng(1000 + r));
    for (int t = 0; t < 3; ++t) sampler_step(ps, model, batch, kernel);
    const double x = ps.particles()[0][0];
    mean += x;
    sq += x * x;
  }
  mean /= reps;
  const double var = sq / reps - mean * mean;
  EXPECT_NEAR(mean, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / reps));
  EXPECT_NEAR(var, 1.0 / 12.0, 0.01);
}

TEST(SamplerStep, DegenerateStepSelfDisqualifies) {
  FunctionCostModel model(2, 1, [](std::size_t i, std::span<const double>) { return i == 0 ? kInf : 1.0; });
  const auto box = SearchSpace::cube(1, -1.0, 1.0);
  const auto kernel = JitterKernel::with_default_epsilon(0.1, box, 9);
  auto ps = init_particles(box, 9, Rng(50));
  const std::vector<std::size_t> bad{0};
  const std::vector<std::size_t> good{1};
  sampler_step(ps, model, bad, kernel);
  EXPECT_EQ(ps.log_z(), -kInf);
  EXPECT_EQ(ps.log_z_steps().back(), -kInf);
  sampler_step(ps, model, good, kernel);
  EXPECT_EQ(ps.log_z(), -kInf);
  EXPECT_NEAR(ps.log_z_steps().back(), -1.0, 1e-15);
  EXPECT_EQ(ps.iteration(), 2u);
}

// RMSE of the one-step posterior mean for f(x) = x^2 under a uniform prior on
// [-1, 1]. The target mean is 0 by symmetry.
double posterior_mean_rmse(std::size_t n, int runs, std::uint64_t seed_base) {
  FunctionCostModel model(1, 1, [](std::size_t, std::span<const double> t) { return t[0] * t[0]; });
  const auto box = SearchSpace::cube(1, -1.0, 1.0);
  const auto kernel = JitterKernel::with_default_epsilon(0.0, box, n);
  const std::vector<std::size_t> batch{0};
  double sq = 0.0;
  for (int r = 0; r < runs; ++r) {
    auto ps = init_particles(box, n, Rng(seed_base + static_cast<std::uint64_t>(r)));
    sampler_step(ps, model, batch, kernel);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ps.particles()[i][0];
    mean /= static_cast<double>(n);
    sq += mean * mean;
  }
  return std::sqrt(sq / runs);
}

TEST(MonteCarloRate, RmseHalvesWhenParticlesQuadruple) {
  const double ratio = posterior_mean_rmse(250, 200, 10000) / posterior_mean_rmse(1000, 200, 20000);
  EXPECT_GE(ratio, 1.6);
  EXPECT_LE(ratio, 2.6);
}

}  // namespace
