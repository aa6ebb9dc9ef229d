#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "psmco/cost_model.hpp"

namespace psmco {

// ---------------------------------------------------------------------------
// Four-minima Gaussian mixture cost:
//   f_i(theta) = -(1/lambda) log sum_k N(theta; m_{i,k}, r I_2),
//   m_{i,k} ~ N(m_k, mean_variance I_2).

struct MixtureProblemSpec {
  std::size_t n = 1000;
  double lambda = 10.0;
  double r = 0.2;
  double mean_variance = 0.5;
  std::vector<std::array<double, 2>> base_means{{4.0, 4.0}, {-4.0, -4.0}, {-4.0, 4.0}, {4.0, -4.0}};
  std::uint64_t seed = 1;
};

class MixtureProblem final : public CostModel {
 public:
  /// Draws the perturbed means from `spec.seed`.
  explicit MixtureProblem(const MixtureProblemSpec& spec);
  /// Uses explicit means, laid out as means[i * K + k] for K base means.
  MixtureProblem(double lambda, double r, std::size_t means_per_component,
                 std::vector<std::array<double, 2>> means);

  std::size_t size() const override { return n_; }
  std::size_t dim() const override { return 2; }
  double component(std::size_t i, std::span<const double> theta) const override;

  double lambda() const noexcept { return lambda_; }
  double r() const noexcept { return r_; }
  std::size_t means_per_component() const noexcept { return per_component_; }
  std::span<const std::array<double, 2>> means(std::size_t i) const {
    return {means_.data() + i * per_component_, per_component_};
  }
  const std::vector<std::array<double, 2>>& all_means() const noexcept { return means_; }

 private:
  std::size_t n_;
  double lambda_;
  double r_;
  std::size_t per_component_;
  double log_norm_;
  std::vector<std::array<double, 2>> means_;
};

inline MixtureProblem make_mixture_problem(const MixtureProblemSpec& spec) {
  return MixtureProblem(spec);
}

// ---------------------------------------------------------------------------
// Sigmoid regression: g_i(theta) = 1 / (1 + exp(-theta_1 - theta_2 x_i)),
// f_i(theta) = (y_i - g_i(theta))^2.

struct SigmoidProblemSpec {
  std::size_t n = 100000;
  double x_min = -2.5;
  double x_max = 2.5;
  std::array<double, 2> theta_true{1.0, -2.0};
  double noise_std = 0.0;
  std::uint64_t seed = 1;
};

double sigmoid(double z) noexcept;

class SigmoidProblem final : public CostModel {
 public:
  explicit SigmoidProblem(const SigmoidProblemSpec& spec);
  SigmoidProblem(std::vector<double> x, std::vector<double> y);

  std::size_t size() const override { return x_.size(); }
  std::size_t dim() const override { return 2; }
  double component(std::size_t i, std::span<const double> theta) const override;

  bool has_gradient() const override { return true; }
  void accumulate_gradient(std::size_t i, std::span<const double> theta,
                           std::span<double> grad) const override;

  double prediction(std::size_t i, std::span<const double> theta) const;

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

inline SigmoidProblem make_sigmoid_problem(const SigmoidProblemSpec& spec) {
  return SigmoidProblem(spec);
}

// ---------------------------------------------------------------------------
// Dataset text files: comma separated with a header row.

/// Header `x,y`; one observation per row.
void write_sigmoid_dataset(std::ostream& out, const SigmoidProblem& problem);
SigmoidProblem read_sigmoid_dataset(std::istream& in);

/// Header `i,k,mean_0,mean_1`; rows ordered by (i, k).
void write_mixture_means(std::ostream& out, const MixtureProblem& problem);
MixtureProblem read_mixture_means(std::istream& in, double lambda, double r);

// ---------------------------------------------------------------------------
// Parallel SGD baseline: M independent mini-batch gradient chains.

struct PsgdConfig {
  std::size_t workers = 25;
  double step_size = 0.5;  ///< eta_k = step_size / sqrt(k)
  std::vector<double> init_point;
  double init_std = 1e-4;
  std::size_t batch_size = 100;
  std::size_t iterations = 1000;
  std::size_t eval_every = 1;  ///< full-cost evaluation stride
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct PsgdPoint {
  std::size_t iteration = 0;  ///< 0 is the initialization
  double best_cost = 0.0;
  std::size_t best_worker = 0;
  std::vector<double> theta;
};

/// Mini-batch gradients average the batch; batches are drawn without
/// replacement and reshuffled every epoch. Throws InvalidArgument if the
/// model has no gradient.
std::vector<PsgdPoint> run_psgd_baseline(const CostModel& model, const PsgdConfig& config);

}  // namespace psmco
