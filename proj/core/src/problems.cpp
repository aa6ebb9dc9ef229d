#include "psmco/problems.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "psmco/errors.hpp"
#include "psmco/random.hpp"
#include "psmco/schedule.hpp"
#include "psmco/thread_pool.hpp"

namespace psmco {

// ---------------------------------------------------------------------------
// Mixture

MixtureProblem::MixtureProblem(const MixtureProblemSpec& spec)
    : n_(spec.n),
      lambda_(spec.lambda),
      r_(spec.r),
      per_component_(spec.base_means.size()) {
  if (n_ == 0) throw InvalidArgument("mixture problem needs n >= 1");
  if (!(lambda_ > 0.0) || !(r_ > 0.0) || !(spec.mean_variance >= 0.0))
    throw InvalidArgument("mixture problem needs lambda > 0, r > 0, mean variance >= 0");
  if (per_component_ == 0) throw InvalidArgument("mixture problem needs at least one base mean");
  log_norm_ = -std::log(2.0 * std::numbers::pi * r_);

  Rng rng(spec.seed);
  const double sd = std::sqrt(spec.mean_variance);
  means_.reserve(n_ * per_component_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& base : spec.base_means) {
      const double a = base[0] + sd * standard_normal(rng);
      const double b = base[1] + sd * standard_normal(rng);
      means_.push_back({a, b});
    }
  }
}

MixtureProblem::MixtureProblem(double lambda, double r, std::size_t means_per_component,
                               std::vector<std::array<double, 2>> means)
    : lambda_(lambda), r_(r), per_component_(means_per_component), means_(std::move(means)) {
  if (!(lambda_ > 0.0) || !(r_ > 0.0))
    throw InvalidArgument("mixture problem needs lambda > 0 and r > 0");
  if (per_component_ == 0 || means_.empty() || means_.size() % per_component_ != 0)
    throw InvalidArgument("mixture means do not split evenly into components");
  n_ = means_.size() / per_component_;
  log_norm_ = -std::log(2.0 * std::numbers::pi * r_);
}

double MixtureProblem::component(std::size_t i, std::span<const double> theta) const {
  const auto mu = means(i);
  // log-sum-exp over the mixture terms; isotropic 2-d Gaussian densities.
  double terms[16];
  std::vector<double> spill;
  double* log_terms = terms;
  if (per_component_ > 16) {
    spill.resize(per_component_);
    log_terms = spill.data();
  }
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < per_component_; ++k) {
    const double dx = theta[0] - mu[k][0];
    const double dy = theta[1] - mu[k][1];
    log_terms[k] = log_norm_ - 0.5 * (dx * dx + dy * dy) / r_;
    max = std::max(max, log_terms[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < per_component_; ++k) sum += std::exp(log_terms[k] - max);
  return -(max + std::log(sum)) / lambda_;
}

// ---------------------------------------------------------------------------
// Sigmoid

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SigmoidProblem::SigmoidProblem(const SigmoidProblemSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("sigmoid problem needs n >= 1");
  if (!(spec.x_min < spec.x_max)) throw InvalidArgument("sigmoid problem needs x_min < x_max");
  if (!(spec.noise_std >= 0.0)) throw InvalidArgument("noise std must be non-negative");
  Rng rng(spec.seed);
  x_.resize(spec.n);
  y_.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    x_[i] = spec.x_min + (spec.x_max - spec.x_min) * uniform01(rng);
    y_[i] = sigmoid(spec.theta_true[0] + spec.theta_true[1] * x_[i]);
    if (spec.noise_std > 0.0) y_[i] += spec.noise_std * standard_normal(rng);
  }
}

SigmoidProblem::SigmoidProblem(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty()) throw InvalidArgument("sigmoid problem needs n >= 1");
  if (x_.size() != y_.size()) throw InvalidArgument("sigmoid inputs and targets differ in length");
}

double SigmoidProblem::prediction(std::size_t i, std::span<const double> theta) const {
  return sigmoid(theta[0] + theta[1] * x_[i]);
}

double SigmoidProblem::component(std::size_t i, std::span<const double> theta) const {
  const double residual = y_[i] - prediction(i, theta);
  return residual * residual;
}

void SigmoidProblem::accumulate_gradient(std::size_t i, std::span<const double> theta,
                                         std::span<double> grad) const {
  const double z = theta[0] + theta[1] * x_[i];
  const double g = sigmoid(z);
  const double slope = g * sigmoid(-z);
  const double scale = -2.0 * (y_[i] - g) * slope;
  grad[0] += scale;
  grad[1] += scale * x_[i];
}

// ---------------------------------------------------------------------------
// Dataset files

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw InvalidArgument("line " + std::to_string(line) + ": not a number: '" + text + "'");
  return value;
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw InvalidArgument("dataset header '" + line + "' does not match '" + header + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_sigmoid_dataset(std::ostream& out, const SigmoidProblem& problem) {
  out << "x,y\n";
  for (std::size_t i = 0; i < problem.size(); ++i)
    out << format_double(problem.x()[i]) << ',' << format_double(problem.y()[i]) << '\n';
}

SigmoidProblem read_sigmoid_dataset(std::istream& in) {
  expect_header(in, "x,y");
  std::vector<double> x, y;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected 2 fields");
    x.push_back(parse_double(fields[0], line_no));
    y.push_back(parse_double(fields[1], line_no));
  }
  return SigmoidProblem(std::move(x), std::move(y));
}

void write_mixture_means(std::ostream& out, const MixtureProblem& problem) {
  out << "i,k,mean_0,mean_1\n";
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto mu = problem.means(i);
    for (std::size_t k = 0; k < mu.size(); ++k)
      out << i << ',' << k << ',' << format_double(mu[k][0]) << ',' << format_double(mu[k][1])
          << '\n';
  }
}

MixtureProblem read_mixture_means(std::istream& in, double lambda, double r) {
  expect_header(in, "i,k,mean_0,mean_1");
  std::vector<std::array<double, 2>> means;
  std::string line;
  std::size_t line_no = 1;
  std::size_t per_component = 0;
  std::size_t expect_i = 0, expect_k = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected 4 fields");
    const auto i = static_cast<std::size_t>(parse_double(fields[0], line_no));
    const auto k = static_cast<std::size_t>(parse_double(fields[1], line_no));
    if (k == 0 && expect_k != 0) {
      if (per_component == 0) per_component = expect_k;
      if (expect_k != per_component)
        throw InvalidArgument("line " + std::to_string(line_no) + ": ragged mixture component");
      ++expect_i;
      expect_k = 0;
    }
    if (i != expect_i || k != expect_k)
      throw InvalidArgument("line " + std::to_string(line_no) + ": rows must be ordered by (i, k)");
    means.push_back({parse_double(fields[2], line_no), parse_double(fields[3], line_no)});
    ++expect_k;
  }
  if (per_component == 0) per_component = expect_k;
  if (expect_k != per_component)
    throw InvalidArgument("last mixture component has the wrong number of means");
  return MixtureProblem(lambda, r, per_component, std::move(means));
}

// ---------------------------------------------------------------------------
// Parallel SGD

std::vector<PsgdPoint> run_psgd_baseline(const CostModel& model, const PsgdConfig& config) {
  if (!model.has_gradient()) throw InvalidArgument("gradient baseline needs an analytic gradient");
  if (config.workers == 0) throw InvalidArgument("gradient baseline needs at least one chain");
  if (config.init_point.size() != model.dim())
    throw InvalidArgument("gradient baseline init point has the wrong dimension");
  if (!(config.step_size >= 0.0) || !(config.init_std >= 0.0))
    throw InvalidArgument("gradient baseline step size and init std must be non-negative");
  if (config.batch_size == 0 || config.batch_size > model.size())
    throw InvalidArgument("mini-batch size must satisfy 1 <= K <= n");
  const std::size_t eval_every = config.eval_every == 0 ? 1 : config.eval_every;

  std::vector<std::size_t> eval_points{0};
  for (std::size_t k = eval_every; k < config.iterations; k += eval_every) eval_points.push_back(k);
  if (config.iterations > 0) eval_points.push_back(config.iterations);

  const std::size_t d = model.dim();
  struct Chain {
    std::vector<double> costs;
    std::vector<std::vector<double>> thetas;
  };
  std::vector<Chain> chains(config.workers);

  ThreadPool pool(config.threads);
  pool.parallel_for(config.workers, [&](std::size_t m) {
    Rng rng(split_seed(config.seed, m));
    std::vector<double> theta(config.init_point);
    for (double& v : theta) v += config.init_std * standard_normal(rng);
    std::vector<double> grad(d);

    Chain& chain = chains[m];
    auto record = [&] {
      chain.costs.push_back(total_cost(model, theta));
      chain.thetas.push_back(theta);
    };
    record();

    auto schedule = build_schedule(model.size(), config.batch_size, rng);
    std::size_t position = 0;
    std::size_t next_eval = 1;
    for (std::size_t k = 1; k <= config.iterations; ++k) {
      if (position == schedule.num_batches()) {
        schedule = build_schedule(model.size(), config.batch_size, rng);
        position = 0;
      }
      const auto batch = schedule.batch(position++);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i : batch) model.accumulate_gradient(i, theta, grad);
      const double rate = config.step_size / std::sqrt(static_cast<double>(k)) /
                          static_cast<double>(batch.size());
      for (std::size_t j = 0; j < d; ++j) theta[j] -= rate * grad[j];
      if (next_eval < eval_points.size() && eval_points[next_eval] == k) {
        record();
        ++next_eval;
      }
    }
  });

  std::vector<PsgdPoint> trajectory;
  trajectory.reserve(eval_points.size());
  for (std::size_t e = 0; e < eval_points.size(); ++e) {
    PsgdPoint point{eval_points[e], std::numeric_limits<double>::infinity(), 0, {}};
    for (std::size_t m = 0; m < chains.size(); ++m) {
      if (chains[m].costs[e] < point.best_cost) {
        point.best_cost = chains[m].costs[e];
        point.best_worker = m;
      }
    }
    point.theta = chains[point.best_worker].thetas[e];
    trajectory.push_back(std::move(point));
  }
  return trajectory;
}

}  // namespace psmco
