#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psmco/cost_model.hpp"
#include "psmco/schedule.hpp"
#include "psmco/space.hpp"

namespace psmco {

/// How each worker draws its initial particles.
struct ParticleInit {
  enum class Kind { uniform, gaussian };
  Kind kind = Kind::uniform;
  std::vector<double> center;  ///< gaussian only
  double stddev = 0.0;         ///< gaussian only
};

struct OptimizerConfig {
  std::size_t workers = 1;          ///< M
  std::size_t particles = 1;        ///< N per worker
  std::size_t batch_size = 1;       ///< K
  double proposal_std = 1.0;        ///< jitter Gaussian std per coordinate
  std::optional<double> epsilon;    ///< defaults to 1/sqrt(N)
  std::uint64_t seed = 0;
  std::size_t estimate_every = 0;   ///< 0: only at the final iteration
  ParticleInit init;
  std::size_t threads = 0;          ///< 0: hardware concurrency
  bool keep_final_particles = false;
  /// Overrides the per-worker seeds derived from `seed`; size must equal M.
  std::vector<std::uint64_t> worker_seeds;

  /// Throws InvalidArgument on inconsistent settings for a model with n
  /// components and a space of dimension d.
  void validate(std::size_t n, std::size_t dim) const;
  double resolved_epsilon() const;
};

struct MinimumEstimate {
  std::vector<double> theta;
  std::size_t worker = 0;
  std::size_t iteration = 0;
  double log_z = 0.0;
  double cost = 0.0;  ///< full f at theta
};

/// One emitted estimate with every worker's cumulative log Z at that time.
struct TraceRow {
  MinimumEstimate estimate;
  std::vector<double> log_z;
};

struct PsmcoResult {
  MinimumEstimate final_estimate;
  std::vector<TraceRow> rows;
  std::vector<std::vector<double>> log_z_steps;  ///< per worker, per iteration
  std::vector<ParticleSet> final_particles;      ///< filled when requested
  std::size_t iterations = 0;
};

/// Every worker disqualified itself; carries the partial result.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, PsmcoResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const PsmcoResult& partial() const noexcept { return partial_; }

 private:
  PsmcoResult partial_;
};

/// Seed of worker m derived from the master seed. A worker splits its seed
/// into independent schedule and particle streams.
std::uint64_t worker_seed(std::uint64_t master, std::size_t worker);

/// The mini-batch schedule a worker with this seed uses.
MiniBatchSchedule worker_schedule(std::uint64_t seed, std::size_t n, std::size_t batch_size);

/// argmax with lowest-index ties; -inf and NaN never selected. Throws
/// NoViableWorker when nothing is finite.
std::size_t select_best_worker(std::span<const double> log_z);

/// M independent samplers over the same cost with distinct mini-batch
/// schedules. At every `estimate_every` stride and at the last iteration the
/// worker with the largest log Z is chosen and the KDE maximizer among its
/// particles is reported.
PsmcoResult run_psmco(const CostModel& model, const SearchSpace& space,
                      const OptimizerConfig& config);

}  // namespace psmco
