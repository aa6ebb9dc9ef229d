#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "psmco/cost_model.hpp"
#include "psmco/parallel.hpp"
#include "psmco/problems.hpp"

namespace psmco::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitIo = 4;

/// Bad configuration or command input; `key_path` names the offending key
/// (dotted, e.g. "sampler.epsilon"), empty when not tied to a key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message);
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { psmco, psgd };
enum class ProblemKind { mixture, sigmoid };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::mixture;
  std::size_t n = 1000;
  std::uint64_t data_seed = 1;
  std::optional<std::string> data_file;
  // mixture
  double lambda = 10.0;
  double r = 0.2;
  double mean_variance = 0.5;
  std::vector<std::array<double, 2>> base_means{{4.0, 4.0}, {-4.0, -4.0}, {-4.0, 4.0}, {4.0, -4.0}};
  // sigmoid
  std::array<double, 2> theta_true{1.0, -2.0};
  double noise_std = 0.0;
  double x_min = -2.5;
  double x_max = 2.5;

  bool operator==(const ProblemConfig&) const = default;
};

struct SamplerSettings {
  std::size_t workers = 100;
  std::size_t particles = 50;
  std::size_t batch_size = 1;
  double jitter_variance = 0.5;
  std::optional<double> epsilon;  ///< null: 1/sqrt(N)
  std::size_t estimate_every = 1;
  ParticleInit::Kind init = ParticleInit::Kind::uniform;
  std::vector<double> init_center;
  double init_variance = 0.0;

  bool operator==(const SamplerSettings&) const = default;
};

struct PsgdSettings {
  std::size_t workers = 25;
  double step_size = 0.5;
  std::vector<double> init_point{0.0, -100.0};
  double init_variance = 1e-8;
  std::size_t batch_size = 100;
  std::optional<std::size_t> iterations;  ///< null: ceil(n / batch_size)
  std::size_t eval_every = 1;
  std::string label = "good_init";

  bool operator==(const PsgdSettings&) const = default;
};

struct ExperimentConfig {
  std::string profile;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::psmco;
  ProblemConfig problem;
  std::vector<double> lower{-50.0, -50.0};
  std::vector<double> upper{50.0, 50.0};
  SamplerSettings sampler;
  PsgdSettings psgd;
  bool dump_particles = false;
  std::size_t threads = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Named presets.
const std::vector<std::string>& profile_names();
/// The resolved document for a preset. Throws ConfigError("profile") if unknown.
nlohmann::json profile_document(std::string_view name);

/// Resolves a document: a "profile" key selects a preset whose values are
/// overlaid by every other key present. Unknown keys, wrong types and
/// constraint violations raise ConfigError with the key path.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig parse_config_text(std::string_view text);

/// Fully resolved document; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Applies `key.path=value`; the value is read as JSON when it parses and as
/// a string otherwise.
void apply_override(nlohmann::json& document, std::string_view assignment);

SearchSpace search_space(const ExperimentConfig& config);
OptimizerConfig optimizer_config(const ExperimentConfig& config);
PsgdConfig psgd_config(const ExperimentConfig& config);

std::unique_ptr<CostModel> build_problem(const ProblemConfig& problem);
/// Short identifier tying traces to the data they were produced on.
std::string problem_id(const ProblemConfig& problem);

// ---------------------------------------------------------------------------
// Trace files

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double value);

void write_psmco_trace(std::ostream& out, const std::string& problem, const PsmcoResult& result);
void write_psgd_trace(std::ostream& out, const std::string& problem, const std::string& label,
                      std::span<const PsgdPoint> trajectory);
void write_particles(std::ostream& out, const ParticleSet& particles);

/// Cost column of a trace file, keyed by iteration.
struct CostTrace {
  enum class Kind { psmco, psgd };
  Kind kind = Kind::psmco;
  std::string problem;
  std::string label;  ///< psgd only
  std::vector<std::size_t> iterations;
  std::vector<double> costs;
};

CostTrace read_cost_trace(std::istream& in);

/// Rows `iter,f_psmco,f_psgd_good_init,f_psgd_bad_init[,f_psgd_<label>...]`
/// on the coarsest iteration axis; finer traces contribute the value of
/// their last row at or before each iteration. Missing baselines keep their
/// column with an ":absent" header suffix and empty cells.
void write_comparison(std::ostream& out, const CostTrace& psmco, std::span<const CostTrace> psgd);

// ---------------------------------------------------------------------------
// Commands

struct RunOutcome {
  std::filesystem::path trace;
  std::filesystem::path summary;
  double wall_time = 0.0;
  std::size_t rows = 0;
};

/// Runs the configured algorithm and writes summary.json, trace.csv and,
/// when requested, particles_worker_<m>.csv into `out_dir`.
RunOutcome run_and_persist(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Reads the traces and writes the comparison table. Nothing is written on
/// error.
void emit_compare(const std::filesystem::path& psmco_trace,
                  std::span<const std::filesystem::path> psgd_traces,
                  const std::filesystem::path& out);

/// Writes the synthetic dataset of the configured problem.
void generate_data(const ExperimentConfig& config, const std::filesystem::path& out);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace psmco::harness
