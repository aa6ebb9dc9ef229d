#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "psmco/errors.hpp"
#include "psmco/problems.hpp"
#include "psmco/random.hpp"

namespace {

using namespace psmco;

SigmoidProblem small_sigmoid(std::size_t n = 2000, std::uint64_t seed = 1) {
  SigmoidProblemSpec spec;
  spec.n = n;
  spec.seed = seed;
  return SigmoidProblem(spec);
}

// ---------------------------------------------------------------------------
// mixture

TEST(MixtureProblem, MatchesDirectFormulaAtMeans) {
  const MixtureProblem p{MixtureProblemSpec{}};
  ASSERT_EQ(p.size(), 1000u);
  ASSERT_EQ(p.means_per_component(), 4u);
  for (std::size_t i = 0; i < p.size(); i += 37) {
    const auto means = p.means(i);
    const std::vector<double> theta{means[0][0], means[0][1]};
    const double expected = oracle::mixture_component(means, 10.0, 0.2, theta);
    EXPECT_NEAR(p.component(i, theta), expected, 1e-12 * std::abs(expected)) << "i=" << i;
  }
}

TEST(MixtureProblem, MatchesDirectFormulaAtRandomPoints) {
  const MixtureProblem p{MixtureProblemSpec{}};
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t i = rng() % p.size();
    const std::vector<double> theta{12 * uniform01(rng) - 6, 12 * uniform01(rng) - 6};
    const double expected = oracle::mixture_component(p.means(i), 10.0, 0.2, theta);
    EXPECT_NEAR(p.component(i, theta), expected, 1e-12 * std::abs(expected));
  }
}

TEST(MixtureProblem, FarPointIsLargeAndFinite) {
  const MixtureProblem p{MixtureProblemSpec{}};
  for (const auto& theta : {std::vector{50.0, 0.0}, std::vector{-35.355, 35.355}, std::vector{50.0, 50.0}}) {
    const double v = p.component(0, theta);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 100.0);
  }
}

TEST(MixtureProblem, FourGridModes) {
  const MixtureProblem p{MixtureProblemSpec{}};
  const auto modes =
      oracle::mixture_modes(p.all_means(), p.means_per_component(), p.lambda(), p.r());
  ASSERT_EQ(modes.size(), 4u);
  // one mode near each base mean
  for (const auto& base : MixtureProblemSpec{}.base_means) {
    double nearest = 1e300;
    for (const auto& m : modes) nearest = std::min(nearest, std::hypot(m.x - base[0], m.y - base[1]));
    EXPECT_LT(nearest, 0.5);
  }
}

TEST(MixtureProblem, RelabelingBaseTermsChangesNothing) {
  const MixtureProblem p{MixtureProblemSpec{}};
  auto means = p.all_means();
  for (std::size_t i = 0; i < p.size(); ++i) std::reverse(means.begin() + 4 * i, means.begin() + 4 * i + 4);
  const MixtureProblem relabeled(p.lambda(), p.r(), 4, means);
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<double> theta{20 * uniform01(rng) - 10, 20 * uniform01(rng) - 10};
    const std::size_t i = rng() % p.size();
    const double a = p.component(i, theta);
    EXPECT_NEAR(relabeled.component(i, theta), a, 1e-12 * std::abs(a));
  }
}

TEST(MixtureProblem, ReproducibleFromSeed) {
  MixtureProblemSpec spec;
  spec.seed = 11;
  EXPECT_EQ(MixtureProblem(spec).all_means(), MixtureProblem(spec).all_means());
  MixtureProblemSpec other = spec;
  other.seed = 12;
  EXPECT_NE(MixtureProblem(spec).all_means(), MixtureProblem(other).all_means());
}

TEST(MixtureProblem, PerturbedMeansHaveConfiguredSpread) {
  MixtureProblemSpec spec;
  spec.n = 20000;
  const MixtureProblem p(spec);
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto m = p.means(i);
    sq += (m[0][0] - 4.0) * (m[0][0] - 4.0);
  }
  EXPECT_NEAR(sq / static_cast<double>(p.size()), 0.5, 0.03);
}

TEST(MixtureProblem, RejectsBadSpec) {
  MixtureProblemSpec spec;
  spec.lambda = 0.0;
  EXPECT_THROW(MixtureProblem{spec}, InvalidArgument);
  spec = {};
  spec.r = -1.0;
  EXPECT_THROW(MixtureProblem{spec}, InvalidArgument);
  spec = {};
  spec.n = 0;
  EXPECT_THROW(MixtureProblem{spec}, InvalidArgument);
}

// ---------------------------------------------------------------------------
// sigmoid

TEST(SigmoidProblem, ZeroParametersPredictHalf) {
  const auto p = small_sigmoid();
  const std::vector<double> zero{0.0, 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p.prediction(i, zero), 0.5);
}

TEST(SigmoidProblem, ZeroCostAtTrueParameters) {
  const auto p = small_sigmoid();
  EXPECT_EQ(total_cost(p, std::vector{1.0, -2.0}), 0.0);
}

TEST(SigmoidProblem, InputsInRange) {
  const auto p = small_sigmoid(10000);
  const auto [lo, hi] = std::minmax_element(p.x().begin(), p.x().end());
  EXPECT_GE(*lo, -2.5);
  EXPECT_LE(*hi, 2.5);
  EXPECT_LT(*lo, -2.4);
  EXPECT_GT(*hi, 2.4);
}

TEST(SigmoidProblem, GradientVanishesInFlatRegion) {
  const auto p = small_sigmoid(5000);
  const std::vector<double> theta{-190.0, 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<double> g(2, 0.0);
    p.accumulate_gradient(i, theta, g);
    ASSERT_LT(std::hypot(g[0], g[1]), 1e-60) << "i=" << i;
  }
}

TEST(SigmoidProblem, GradientMatchesFiniteDifferences) {
  const auto p = small_sigmoid(50);
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const std::vector<double> theta{4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2};
    const std::size_t i = rng() % p.size();
    std::vector<double> g(2, 0.0);
    p.accumulate_gradient(i, theta, g);
    for (std::size_t j = 0; j < 2; ++j) {
      const double step = 1e-6;
      auto up = theta, down = theta;
      up[j] += step;
      down[j] -= step;
      const double fd = (p.component(i, up) - p.component(i, down)) / (2 * step);
      EXPECT_NEAR(g[j], fd, 1e-7);
    }
  }
}

TEST(SigmoidProblem, CostIsNonNegative) {
  const auto p = small_sigmoid(500);
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const std::vector<double> theta{400 * uniform01(rng) - 200, 400 * uniform01(rng) - 200};
    for (std::size_t i = 0; i < p.size(); i += 17) ASSERT_GE(p.component(i, theta), 0.0);
  }
}

TEST(SigmoidProblem, StableSigmoidAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-700.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-1e6)));
}

TEST(SigmoidProblem, ReproducibleFromSeed) {
  const auto a = small_sigmoid(100, 9);
  const auto b = small_sigmoid(100, 9);
  EXPECT_EQ(a.x(), b.x());
  EXPECT_EQ(a.y(), b.y());
  EXPECT_NE(a.x(), small_sigmoid(100, 10).x());
}

TEST(SigmoidProblem, NoisyTargetsDiffer) {
  SigmoidProblemSpec spec;
  spec.n = 100;
  spec.noise_std = 0.1;
  const SigmoidProblem p(spec);
  EXPECT_GT(total_cost(p, std::vector{1.0, -2.0}), 0.0);
}

// ---------------------------------------------------------------------------
// dataset files

TEST(Datasets, SigmoidRoundTrip) {
  const auto p = small_sigmoid(300, 3);
  std::stringstream ss;
  write_sigmoid_dataset(ss, p);
  EXPECT_EQ(ss.str().substr(0, 4), "x,y\n");
  const auto q = read_sigmoid_dataset(ss);
  EXPECT_EQ(q.x(), p.x());
  EXPECT_EQ(q.y(), p.y());
}

TEST(Datasets, MixtureRoundTrip) {
  MixtureProblemSpec spec;
  spec.n = 50;
  const MixtureProblem p(spec);
  std::stringstream ss;
  write_mixture_means(ss, p);
  const auto q = read_mixture_means(ss, p.lambda(), p.r());
  EXPECT_EQ(q.all_means(), p.all_means());
  EXPECT_EQ(q.size(), 50u);
}

TEST(Datasets, MalformedInputRejected) {
  std::stringstream bad_header("a,b\n1,2\n");
  EXPECT_THROW(read_sigmoid_dataset(bad_header), InvalidArgument);
  std::stringstream bad_value("x,y\n1,zz\n");
  EXPECT_THROW(read_sigmoid_dataset(bad_value), InvalidArgument);
  std::stringstream empty("x,y\n");
  EXPECT_THROW(read_sigmoid_dataset(empty), InvalidArgument);
}

// ---------------------------------------------------------------------------
// PSGD

PsgdConfig baseline(std::vector<double> init) {
  PsgdConfig c;
  c.workers = 5;
  c.init_point = std::move(init);
  c.init_std = 1e-4;
  c.batch_size = 100;
  c.iterations = 1000;
  c.seed = 8;
  return c;
}

TEST(Psgd, ZeroStepSizeIsFrozen) {
  const auto p = small_sigmoid(2000);
  auto c = baseline({0.0, -100.0});
  c.step_size = 0.0;
  c.iterations = 50;
  const auto traj = run_psgd_baseline(p, c);
  ASSERT_EQ(traj.size(), 51u);
  for (const auto& pt : traj) {
    EXPECT_EQ(pt.best_cost, traj.front().best_cost);
    EXPECT_EQ(pt.theta, traj.front().theta);
  }
}

TEST(Psgd, BadInitStaysFlat) {
  const auto p = small_sigmoid(10000);
  const auto traj = run_psgd_baseline(p, baseline({-190.0, 0.0}));
  ASSERT_EQ(traj.size(), 1001u);
  for (const auto& pt : traj) ASSERT_NEAR(pt.best_cost, traj.front().best_cost, 1e-6);
}

TEST(Psgd, GoodInitDecreases) {
  const auto p = small_sigmoid(10000);
  const auto traj = run_psgd_baseline(p, baseline({0.0, -100.0}));
  EXPECT_LT(traj.back().best_cost, traj.front().best_cost);
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_EQ(traj[k].iteration, k);
}

TEST(Psgd, EvaluationStride) {
  const auto p = small_sigmoid(1000);
  auto c = baseline({0.0, -100.0});
  c.iterations = 25;
  c.eval_every = 10;
  std::vector<std::size_t> its;
  for (const auto& pt : run_psgd_baseline(p, c)) its.push_back(pt.iteration);
  EXPECT_EQ(its, (std::vector<std::size_t>{0, 10, 20, 25}));
}

TEST(Psgd, DeterministicAcrossThreads) {
  const auto p = small_sigmoid(2000);
  auto c = baseline({0.0, -100.0});
  c.iterations = 100;
  c.threads = 1;
  const auto a = run_psgd_baseline(p, c);
  c.threads = 3;
  const auto b = run_psgd_baseline(p, c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].best_cost, b[k].best_cost);
    EXPECT_EQ(a[k].theta, b[k].theta);
  }
}

TEST(Psgd, RequiresGradient) {
  const MixtureProblem mixture{MixtureProblemSpec{}};
  EXPECT_THROW(run_psgd_baseline(mixture, baseline({0.0, 0.0})), InvalidArgument);
}

}  // namespace
