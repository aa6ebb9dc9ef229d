#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "psmco/errors.hpp"
#include "psmco/harness.hpp"

namespace psmco::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

// Writes through a temporary sibling so a failed command leaves no file.
void write_file(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = '_';
  return s;
}

json estimate_json(const MinimumEstimate& e) {
  return {{"theta", e.theta}, {"worker", e.worker}, {"iteration", e.iteration},
          {"log_z", format_number(e.log_z)}, {"f_value", e.cost}};
}

}  // namespace

std::unique_ptr<CostModel> build_problem(const ProblemConfig& p) {
  if (p.kind == ProblemKind::mixture) {
    std::unique_ptr<MixtureProblem> model;
    if (p.data_file) {
      auto in = open_input(*p.data_file);
      try {
        model = std::make_unique<MixtureProblem>(read_mixture_means(in, p.lambda, p.r));
      } catch (const InvalidArgument& e) {
        throw ConfigError("problem.data_file", e.what());
      }
    } else {
      MixtureProblemSpec spec;
      spec.n = p.n;
      spec.lambda = p.lambda;
      spec.r = p.r;
      spec.mean_variance = p.mean_variance;
      spec.base_means = p.base_means;
      spec.seed = p.data_seed;
      model = std::make_unique<MixtureProblem>(spec);
    }
    if (model->size() != p.n)
      throw ConfigError("problem.n", "data file holds " + std::to_string(model->size()) +
                                         " components, not " + std::to_string(p.n));
    return model;
  }

  std::unique_ptr<SigmoidProblem> model;
  if (p.data_file) {
    auto in = open_input(*p.data_file);
    try {
      model = std::make_unique<SigmoidProblem>(read_sigmoid_dataset(in));
    } catch (const InvalidArgument& e) {
      throw ConfigError("problem.data_file", e.what());
    }
  } else {
    SigmoidProblemSpec spec;
    spec.n = p.n;
    spec.x_min = p.x_min;
    spec.x_max = p.x_max;
    spec.theta_true = p.theta_true;
    spec.noise_std = p.noise_std;
    spec.seed = p.data_seed;
    model = std::make_unique<SigmoidProblem>(spec);
  }
  if (model->size() != p.n)
    throw ConfigError("problem.n", "data file holds " + std::to_string(model->size()) +
                                       " observations, not " + std::to_string(p.n));
  return model;
}

std::string problem_id(const ProblemConfig& p) {
  std::ostringstream os;
  if (p.data_file) {
    os << (p.kind == ProblemKind::mixture ? "mixture" : "sigmoid")
       << ":file=" << fs::path(*p.data_file).filename().string() << ":n=" << p.n;
    return sanitize(os.str());
  }
  if (p.kind == ProblemKind::mixture) {
    os << "mixture:n=" << p.n << ":data_seed=" << p.data_seed << ":lambda=" << format_number(p.lambda)
       << ":r=" << format_number(p.r) << ":mean_variance=" << format_number(p.mean_variance);
  } else {
    os << "sigmoid:n=" << p.n << ":data_seed=" << p.data_seed
       << ":theta_true=" << format_number(p.theta_true[0]) << '/' << format_number(p.theta_true[1])
       << ":noise_std=" << format_number(p.noise_std);
  }
  return sanitize(os.str());
}

RunOutcome run_and_persist(const ExperimentConfig& config, const fs::path& out_dir) {
  ensure_directory(out_dir);
  const auto model = build_problem(config.problem);
  const std::string id = problem_id(config.problem);

  RunOutcome outcome;
  outcome.trace = out_dir / "trace.csv";
  outcome.summary = out_dir / "summary.json";

  json summary{{"config", to_json(config)}, {"problem_id", id}};
  std::ostringstream trace;
  const auto start = std::chrono::steady_clock::now();

  if (config.algorithm == Algorithm::psgd) {
    const auto trajectory = run_psgd_baseline(*model, psgd_config(config));
    outcome.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_psgd_trace(trace, id, config.psgd.label, trajectory);
    outcome.rows = trajectory.size();
    const auto& last = trajectory.back();
    summary["algorithm"] = "psgd";
    summary["final"] = {{"iteration", last.iteration}, {"worker", last.best_worker},
                        {"theta", last.theta}, {"f_value", last.best_cost}};
  } else {
    const auto space = search_space(config);
    const auto optimizer = optimizer_config(config);
    PsmcoResult result;
    try {
      result = run_psmco(*model, space, optimizer);
    } catch (const RunFailure& failure) {
      // Keep the partial trace for diagnosis.
      std::ostringstream partial;
      write_psmco_trace(partial, id, failure.partial());
      write_file(out_dir / "trace.partial.csv", partial.str());
      throw;
    }
    outcome.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_psmco_trace(trace, id, result);
    outcome.rows = result.rows.size();
    summary["algorithm"] = "psmco";
    summary["iterations"] = result.iterations;
    summary["epsilon"] = optimizer.resolved_epsilon();
    summary["final"] = estimate_json(result.final_estimate);
    for (std::size_t m = 0; m < result.final_particles.size(); ++m) {
      std::ostringstream os;
      write_particles(os, result.final_particles[m]);
      write_file(out_dir / ("particles_worker_" + std::to_string(m) + ".csv"), os.str());
    }
  }
  summary["rows"] = outcome.rows;
  summary["wall_time_seconds"] = outcome.wall_time;

  write_file(outcome.trace, trace.str());
  write_file(outcome.summary, summary.dump(2) + "\n");
  return outcome;
}

void emit_compare(const fs::path& psmco_trace, std::span<const fs::path> psgd_traces,
                  const fs::path& out) {
  auto read = [](const fs::path& path, CostTrace::Kind expected) {
    auto in = open_input(path);
    auto trace = read_cost_trace(in);
    if (trace.kind != expected)
      throw ConfigError("", "'" + path.string() + "' is not a " +
                                (expected == CostTrace::Kind::psmco ? "PSMCO" : "PSGD") + " trace");
    return trace;
  };
  const auto psmco = read(psmco_trace, CostTrace::Kind::psmco);
  std::vector<CostTrace> psgd;
  for (const auto& p : psgd_traces) psgd.push_back(read(p, CostTrace::Kind::psgd));
  std::ostringstream os;
  write_comparison(os, psmco, psgd);
  write_file(out, os.str());
}

void generate_data(const ExperimentConfig& config, const fs::path& out) {
  auto problem = config.problem;
  problem.data_file.reset();
  const auto model = build_problem(problem);
  std::ostringstream os;
  if (problem.kind == ProblemKind::mixture)
    write_mixture_means(os, static_cast<const MixtureProblem&>(*model));
  else
    write_sigmoid_dataset(os, static_cast<const SigmoidProblem&>(*model));
  write_file(out, os.str());
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel sequential Monte Carlo optimizer: experiments and trace tools"};
  app.require_subcommand(1);

  std::string profile, config_file, out_path;
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;
  std::size_t threads = 0;

  auto* run = app.add_subcommand("run", "Run an experiment and persist its traces");
  run->add_option("--profile", profile, "Preset name");
  run->add_option("--config", config_file, "JSON configuration document");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_path, "Output directory")->required();
  run->add_option("--override", overrides, "key.path=value (repeatable)");
  run->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::string psmco_file;
  std::vector<std::string> psgd_files;
  auto* compare = app.add_subcommand("compare", "Merge PSMCO and PSGD cost traces");
  compare->add_option("--psmco", psmco_file, "PSMCO trace.csv")->required();
  compare->add_option("--psgd", psgd_files, "PSGD trace.csv (repeatable)");
  compare->add_option("--out", out_path, "Output CSV")->required();

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic dataset of a profile");
  gen->add_option("--profile", profile, "Preset name")->required();
  gen->add_option("--seed", seed, "Data seed");
  gen->add_option("--out", out_path, "Output CSV")->required();
  gen->add_option("--override", overrides, "key.path=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto resolve = [&](bool seed_is_data_seed) {
    json doc = json::object();
    if (!config_file.empty()) {
      auto in = open_input(config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        doc = json::parse(ss.str());
      } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON in '" + config_file + "': " + e.what());
      }
      if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
    }
    if (!profile.empty()) doc["profile"] = profile;
    if (seed_is_data_seed) {
      doc["problem"]["data_seed"] = seed;
    } else if (run->count("--seed") > 0 || !doc.contains("seed")) {
      doc["seed"] = seed;
    }
    if (run->count("--threads") > 0) doc["threads"] = threads;
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc);
  };

  try {
    if (*run) {
      if (profile.empty() && config_file.empty())
        throw ConfigError("profile", "run needs --profile or --config");
      const auto config = resolve(false);
      const auto outcome = run_and_persist(config, out_path);
      out << "wrote " << outcome.trace.string() << " (" << outcome.rows << " rows, "
          << outcome.wall_time << " s)\n";
    } else if (*compare) {
      std::vector<fs::path> psgd(psgd_files.begin(), psgd_files.end());
      emit_compare(psmco_file, psgd, out_path);
      out << "wrote " << out_path << '\n';
    } else if (*gen) {
      const auto config = resolve(true);
      generate_data(config, out_path);
      out << "wrote " << out_path << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const RunFailure& e) {
    err << "run failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace psmco::harness
