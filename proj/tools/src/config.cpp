#include <cmath>
#include <limits>
#include <sstream>

#include "psmco/errors.hpp"
#include "psmco/harness.hpp"
#include "psmco/sampler.hpp"

namespace psmco::harness {

using nlohmann::json;

ConfigError::ConfigError(std::string key_path, const std::string& message)
    : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
      key_path_(std::move(key_path)) {}

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const char* algorithm_name(Algorithm a) { return a == Algorithm::psgd ? "psgd" : "psmco"; }
const char* kind_name(ProblemKind k) { return k == ProblemKind::sigmoid ? "sigmoid" : "mixture"; }
const char* init_name(ParticleInit::Kind k) {
  return k == ParticleInit::Kind::gaussian ? "gaussian" : "uniform";
}

// Typed access to one JSON object with key-path diagnostics.
class Reader {
 public:
  Reader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(key.empty() ? path_ : join(path_, key), message);
  }

  const json& at(const std::string& key) const {
    auto it = object_.find(key);
    if (it == object_.end()) fail(key, "missing key");
    return *it;
  }

  bool is_null(const std::string& key) const { return at(key).is_null(); }

  Reader child(const std::string& key) const { return Reader(at(key), join(path_, key)); }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::uint64_t u64(const std::string& key) const { return as_u64(at(key), key); }

  std::size_t size(const std::string& key) const {
    return static_cast<std::size_t>(as_u64(at(key), key));
  }

  bool boolean(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  std::uint64_t as_u64(const json& v, const std::string& key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) fail(key, "expected a non-negative integer");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && std::floor(d) == d && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail(key, "expected a non-negative integer");
  }

  const json& object_;
  std::string path_;
};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Every key a document may contain; leaves are placeholders.
const json& schema() {
  static const json s = to_json(ExperimentConfig{});
  return s;
}

void reject_unknown(const json& doc, const json& templ, const std::string& path) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key_path = join(path, it.key());
    auto t = templ.find(it.key());
    if (t == templ.end()) throw ConfigError(key_path, "unknown key");
    if (t->is_object()) {
      if (!it->is_object()) throw ConfigError(key_path, "expected an object");
      reject_unknown(*it, *t, key_path);
    }
  }
}

void overlay(json& base, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
      overlay(base[it.key()], *it);
    else
      base[it.key()] = *it;
  }
}

bool has_path(const json& doc, std::string_view dotted) {
  const json* node = &doc;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto end = dotted.find('.', start);
    const std::string key(dotted.substr(start, end == std::string_view::npos ? dotted.size() - start
                                                                              : end - start));
    if (!node->is_object() || !node->contains(key)) return false;
    node = &(*node)[key];
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return true;
}

constexpr std::string_view kRequiredWithoutProfile[] = {
    "problem.kind",      "space.lower",         "space.upper",
    "sampler.workers",   "sampler.particles",   "sampler.batch_size",
    "sampler.jitter_variance",
};

ExperimentConfig mixture_profile() {
  ExperimentConfig c;
  c.profile = "mixture-5.1";
  c.problem.kind = ProblemKind::mixture;
  c.problem.n = 1000;
  c.lower = {-50.0, -50.0};
  c.upper = {50.0, 50.0};
  c.sampler = {};
  c.sampler.workers = 100;
  c.sampler.particles = 50;
  c.sampler.batch_size = 1;
  c.sampler.jitter_variance = 0.5;
  return c;
}

ExperimentConfig sigmoid_profile() {
  ExperimentConfig c;
  c.profile = "sigmoid-5.2";
  c.problem.kind = ProblemKind::sigmoid;
  c.problem.n = 100000;
  c.lower = {-200.0, -200.0};
  c.upper = {200.0, 200.0};
  c.sampler.workers = 25;
  c.sampler.particles = 40;
  c.sampler.batch_size = 100;
  c.sampler.jitter_variance = 1000.0;
  c.sampler.init = ParticleInit::Kind::gaussian;
  c.sampler.init_center = {-190.0, 0.0};
  c.sampler.init_variance = 1e-8;
  c.psgd.workers = 25;
  c.psgd.batch_size = 100;
  c.psgd.init_point = {0.0, -100.0};
  c.psgd.init_variance = 1e-8;
  c.psgd.label = "good_init";
  return c;
}

ExperimentConfig make_profile(std::string_view name) {
  if (name == "mixture-5.1") return mixture_profile();
  if (name == "sigmoid-5.2") return sigmoid_profile();
  if (name == "psgd-good-5.2") {
    auto c = sigmoid_profile();
    c.profile = std::string(name);
    c.algorithm = Algorithm::psgd;
    return c;
  }
  if (name == "psgd-bad-5.2") {
    auto c = sigmoid_profile();
    c.profile = std::string(name);
    c.algorithm = Algorithm::psgd;
    c.psgd.init_point = {-190.0, 0.0};
    c.psgd.label = "bad_init";
    return c;
  }
  std::string known;
  for (const auto& p : profile_names()) known += (known.empty() ? "" : ", ") + p;
  throw ConfigError("profile", "unknown profile '" + std::string(name) + "' (known: " + known + ")");
}

ProblemConfig read_problem(const Reader& r, std::uint64_t seed) {
  ProblemConfig p;
  const auto kind = r.string("kind");
  if (kind == "mixture")
    p.kind = ProblemKind::mixture;
  else if (kind == "sigmoid")
    p.kind = ProblemKind::sigmoid;
  else
    r.fail("kind", "expected \"mixture\" or \"sigmoid\"");
  p.n = r.size("n");
  if (p.n == 0) r.fail("n", "must be at least 1");
  p.data_seed = r.is_null("data_seed") ? seed : r.u64("data_seed");
  if (!r.is_null("data_file")) p.data_file = r.string("data_file");

  p.lambda = r.number("lambda");
  if (!(p.lambda > 0.0)) r.fail("lambda", "must be positive");
  p.r = r.number("r");
  if (!(p.r > 0.0)) r.fail("r", "must be positive");
  p.mean_variance = r.number("mean_variance");
  if (!(p.mean_variance >= 0.0)) r.fail("mean_variance", "must be non-negative");

  const auto& means = r.at("base_means");
  if (!means.is_array() || means.empty()) r.fail("base_means", "expected a non-empty array of pairs");
  p.base_means.clear();
  for (const auto& m : means) {
    if (!m.is_array() || m.size() != 2 || !m[0].is_number() || !m[1].is_number())
      r.fail("base_means", "expected a non-empty array of pairs");
    p.base_means.push_back({m[0].get<double>(), m[1].get<double>()});
  }

  const auto truth = r.numbers("theta_true");
  if (truth.size() != 2) r.fail("theta_true", "expected two numbers");
  p.theta_true = {truth[0], truth[1]};
  p.noise_std = r.number("noise_std");
  if (!(p.noise_std >= 0.0)) r.fail("noise_std", "must be non-negative");
  p.x_min = r.number("x_min");
  p.x_max = r.number("x_max");
  if (!(p.x_min < p.x_max)) r.fail("x_max", "must exceed x_min");
  return p;
}

// K <= n is only enforced for the section the selected algorithm uses.
SamplerSettings read_sampler(const Reader& r, std::size_t n, bool check_batch) {
  SamplerSettings s;
  s.workers = r.size("workers");
  if (s.workers == 0) r.fail("workers", "must be at least 1");
  s.particles = r.size("particles");
  if (s.particles == 0) r.fail("particles", "must be at least 1");
  s.batch_size = r.size("batch_size");
  if (s.batch_size == 0 || (check_batch && s.batch_size > n))
    r.fail("batch_size", "must satisfy 1 <= K <= n");
  s.jitter_variance = r.number("jitter_variance");
  if (!(s.jitter_variance >= 0.0) || !std::isfinite(s.jitter_variance))
    r.fail("jitter_variance", "must be finite and non-negative");
  if (!r.is_null("epsilon")) {
    const double eps = r.number("epsilon");
    if (!(eps > 0.0)) r.fail("epsilon", "must be positive");
    if (eps > JitterKernel::max_epsilon(s.particles) * (1.0 + 1e-12))
      r.fail("epsilon", "exceeds 1/sqrt(N) = " +
                            format_number(JitterKernel::max_epsilon(s.particles)));
    s.epsilon = eps;
  }
  s.estimate_every = r.size("estimate_every");

  const Reader init = r.child("init");
  const auto kind = init.string("kind");
  if (kind == "uniform")
    s.init = ParticleInit::Kind::uniform;
  else if (kind == "gaussian")
    s.init = ParticleInit::Kind::gaussian;
  else
    init.fail("kind", "expected \"uniform\" or \"gaussian\"");
  if (!init.is_null("center")) s.init_center = init.numbers("center");
  s.init_variance = init.number("variance");
  if (!(s.init_variance >= 0.0)) init.fail("variance", "must be non-negative");
  if (s.init == ParticleInit::Kind::gaussian && s.init_center.size() != 2)
    init.fail("center", "gaussian initialization needs a 2-d center");
  return s;
}

PsgdSettings read_psgd(const Reader& r, std::size_t n, bool check_batch) {
  PsgdSettings g;
  g.workers = r.size("workers");
  if (g.workers == 0) r.fail("workers", "must be at least 1");
  g.step_size = r.number("step_size");
  if (!(g.step_size >= 0.0)) r.fail("step_size", "must be non-negative");
  g.init_point = r.numbers("init_point");
  if (g.init_point.size() != 2) r.fail("init_point", "expected two numbers");
  g.init_variance = r.number("init_variance");
  if (!(g.init_variance >= 0.0)) r.fail("init_variance", "must be non-negative");
  g.batch_size = r.size("batch_size");
  if (g.batch_size == 0 || (check_batch && g.batch_size > n))
    r.fail("batch_size", "must satisfy 1 <= K <= n");
  if (!r.is_null("iterations")) g.iterations = r.size("iterations");
  g.eval_every = r.size("eval_every");
  if (g.eval_every == 0) r.fail("eval_every", "must be at least 1");
  g.label = r.string("label");
  if (g.label.empty() || g.label.find_first_of(",\n\r") != std::string::npos)
    r.fail("label", "must be non-empty without commas or newlines");
  return g;
}

}  // namespace

const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> names{"mixture-5.1", "sigmoid-5.2", "psgd-good-5.2",
                                              "psgd-bad-5.2"};
  return names;
}

json profile_document(std::string_view name) {
  json doc = to_json(make_profile(name));
  doc["problem"]["data_seed"] = nullptr;
  return doc;
}

json to_json(const ExperimentConfig& c) {
  json means = json::array();
  for (const auto& m : c.problem.base_means) means.push_back({m[0], m[1]});
  return json{
      {"profile", c.profile},
      {"seed", c.seed},
      {"algorithm", algorithm_name(c.algorithm)},
      {"threads", c.threads},
      {"problem",
       {{"kind", kind_name(c.problem.kind)},
        {"n", c.problem.n},
        {"data_seed", c.problem.data_seed},
        {"data_file", c.problem.data_file ? json(*c.problem.data_file) : json(nullptr)},
        {"lambda", c.problem.lambda},
        {"r", c.problem.r},
        {"mean_variance", c.problem.mean_variance},
        {"base_means", means},
        {"theta_true", {c.problem.theta_true[0], c.problem.theta_true[1]}},
        {"noise_std", c.problem.noise_std},
        {"x_min", c.problem.x_min},
        {"x_max", c.problem.x_max}}},
      {"space", {{"lower", c.lower}, {"upper", c.upper}}},
      {"sampler",
       {{"workers", c.sampler.workers},
        {"particles", c.sampler.particles},
        {"batch_size", c.sampler.batch_size},
        {"jitter_variance", c.sampler.jitter_variance},
        {"epsilon", optional_number(c.sampler.epsilon)},
        {"estimate_every", c.sampler.estimate_every},
        {"init",
         {{"kind", init_name(c.sampler.init)},
          {"center", c.sampler.init_center},
          {"variance", c.sampler.init_variance}}}}},
      {"psgd",
       {{"workers", c.psgd.workers},
        {"step_size", c.psgd.step_size},
        {"init_point", c.psgd.init_point},
        {"init_variance", c.psgd.init_variance},
        {"batch_size", c.psgd.batch_size},
        {"iterations", c.psgd.iterations ? json(*c.psgd.iterations) : json(nullptr)},
        {"eval_every", c.psgd.eval_every},
        {"label", c.psgd.label}}},
      {"output", {{"dump_particles", c.dump_particles}}},
  };
}

ExperimentConfig parse_config(const json& document) {
  if (!document.is_object()) throw ConfigError("", "configuration must be a JSON object");
  reject_unknown(document, schema(), "");

  json merged;
  std::string profile;
  if (document.contains("profile")) {
    const auto& p = document["profile"];
    if (!p.is_string()) throw ConfigError("profile", "expected a string");
    profile = p.get<std::string>();
  }
  if (!profile.empty()) {
    merged = profile_document(profile);
  } else {
    std::string missing;
    for (auto key : kRequiredWithoutProfile)
      if (!has_path(document, key)) missing += (missing.empty() ? "" : ", ") + std::string(key);
    if (!missing.empty())
      throw ConfigError("", "missing required keys: " + missing +
                                " (or select a preset with \"profile\")");
    merged = schema();
    merged["problem"]["data_seed"] = nullptr;
  }
  overlay(merged, document);

  const Reader root(merged, "");
  ExperimentConfig c;
  c.profile = root.string("profile");
  c.seed = root.u64("seed");
  const auto algorithm = root.string("algorithm");
  if (algorithm == "psmco")
    c.algorithm = Algorithm::psmco;
  else if (algorithm == "psgd")
    c.algorithm = Algorithm::psgd;
  else
    root.fail("algorithm", "expected \"psmco\" or \"psgd\"");
  c.threads = root.size("threads");

  c.problem = read_problem(root.child("problem"), c.seed);

  const Reader space = root.child("space");
  c.lower = space.numbers("lower");
  c.upper = space.numbers("upper");
  if (c.lower.size() != 2) space.fail("lower", "expected two numbers (the problems are 2-d)");
  if (c.upper.size() != 2) space.fail("upper", "expected two numbers (the problems are 2-d)");
  for (std::size_t j = 0; j < 2; ++j)
    if (!(c.lower[j] < c.upper[j]) || !std::isfinite(c.lower[j]) || !std::isfinite(c.upper[j]))
      space.fail("upper", "each bound must be finite with lower < upper");

  c.sampler = read_sampler(root.child("sampler"), c.problem.n, c.algorithm == Algorithm::psmco);
  c.psgd = read_psgd(root.child("psgd"), c.problem.n, c.algorithm == Algorithm::psgd);
  c.dump_particles = root.child("output").boolean("dump_particles");

  if (c.algorithm == Algorithm::psgd && c.problem.kind != ProblemKind::sigmoid)
    root.fail("algorithm", "the gradient baseline needs the sigmoid problem");
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("", "override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &document;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos
                                                                        : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

SearchSpace search_space(const ExperimentConfig& config) {
  return SearchSpace(config.lower, config.upper);
}

OptimizerConfig optimizer_config(const ExperimentConfig& c) {
  OptimizerConfig o;
  o.workers = c.sampler.workers;
  o.particles = c.sampler.particles;
  o.batch_size = c.sampler.batch_size;
  o.proposal_std = std::sqrt(c.sampler.jitter_variance);
  o.epsilon = c.sampler.epsilon;
  o.seed = c.seed;
  o.estimate_every = c.sampler.estimate_every;
  o.init.kind = c.sampler.init;
  o.init.center = c.sampler.init_center;
  o.init.stddev = std::sqrt(c.sampler.init_variance);
  o.threads = c.threads;
  o.keep_final_particles = c.dump_particles;
  return o;
}

PsgdConfig psgd_config(const ExperimentConfig& c) {
  PsgdConfig g;
  g.workers = c.psgd.workers;
  g.step_size = c.psgd.step_size;
  g.init_point = c.psgd.init_point;
  g.init_std = std::sqrt(c.psgd.init_variance);
  g.batch_size = c.psgd.batch_size;
  g.iterations = c.psgd.iterations.value_or((c.problem.n + g.batch_size - 1) / g.batch_size);
  g.eval_every = c.psgd.eval_every;
  g.seed = c.seed;
  g.threads = c.threads;
  return g;
}

}  // namespace psmco::harness
