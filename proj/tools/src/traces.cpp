#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "psmco/harness.hpp"

namespace psmco::harness {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_number(const std::string& text, std::size_t line_no) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("", "trace line " + std::to_string(line_no) + ": bad number '" + text + "'");
  return value;
}

std::size_t parse_index(const std::string& text, std::size_t line_no) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("", "trace line " + std::to_string(line_no) + ": bad index '" + text + "'");
  return value;
}

std::size_t column(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("", "trace header lacks column '" + std::string(name) + "'");
}

// Value of the last entry at or before `iteration`; NaN when none exists.
double hold_value(const CostTrace& trace, std::size_t iteration) {
  double value = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < trace.iterations.size() && trace.iterations[i] <= iteration; ++i)
    value = trace.costs[i];
  return value;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_psmco_trace(std::ostream& out, const std::string& problem, const PsmcoResult& result) {
  const std::size_t workers = result.rows.empty() ? 0 : result.rows.front().log_z.size();
  const std::size_t dim = result.rows.empty() ? 0 : result.rows.front().estimate.theta.size();
  out << "problem,t,best_worker";
  for (std::size_t j = 0; j < dim; ++j) out << ",theta_" << j;
  out << ",f_value";
  for (std::size_t m = 0; m < workers; ++m) out << ",log_z_" << m;
  out << '\n';
  for (const auto& row : result.rows) {
    const auto& e = row.estimate;
    out << problem << ',' << e.iteration << ',' << e.worker;
    for (double v : e.theta) out << ',' << format_number(v);
    out << ',' << format_number(e.cost);
    for (double z : row.log_z) out << ',' << format_number(z);
    out << '\n';
  }
}

void write_psgd_trace(std::ostream& out, const std::string& problem, const std::string& label,
                      std::span<const PsgdPoint> trajectory) {
  const std::size_t dim = trajectory.empty() ? 0 : trajectory.front().theta.size();
  out << "problem,label,iteration,best_worker";
  for (std::size_t j = 0; j < dim; ++j) out << ",theta_" << j;
  out << ",f_value\n";
  for (const auto& p : trajectory) {
    out << problem << ',' << label << ',' << p.iteration << ',' << p.best_worker;
    for (double v : p.theta) out << ',' << format_number(v);
    out << ',' << format_number(p.best_cost) << '\n';
  }
}

void write_particles(std::ostream& out, const ParticleSet& particles) {
  for (std::size_t j = 0; j < particles.dim(); ++j) out << (j ? "," : "") << "theta_" << j;
  out << '\n';
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const auto p = particles[i];
    for (std::size_t j = 0; j < p.size(); ++j) out << (j ? "," : "") << format_number(p[j]);
    out << '\n';
  }
}

CostTrace read_cost_trace(std::istream& in) {
  std::string line;
  if (!read_line(in, line) || line.empty()) throw ConfigError("", "trace file is empty");
  const auto header = split_row(line);

  CostTrace trace;
  std::size_t iter_col = 0;
  std::size_t label_col = 0;
  if (header.size() > 1 && header[1] == "t") {
    trace.kind = CostTrace::Kind::psmco;
    iter_col = 1;
  } else if (header.size() > 2 && header[1] == "label" && header[2] == "iteration") {
    trace.kind = CostTrace::Kind::psgd;
    label_col = 1;
    iter_col = 2;
  } else {
    throw ConfigError("", "unrecognized trace header '" + line + "'");
  }
  if (header.front() != "problem") throw ConfigError("", "trace header must start with 'problem'");
  const std::size_t cost_col = column(header, "f_value");

  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != header.size())
      throw ConfigError("", "trace line " + std::to_string(line_no) + ": wrong field count");
    if (trace.iterations.empty()) {
      trace.problem = fields[0];
      if (trace.kind == CostTrace::Kind::psgd) trace.label = fields[label_col];
    } else if (fields[0] != trace.problem) {
      throw ConfigError("", "trace line " + std::to_string(line_no) + ": problem id changes");
    }
    const auto it = parse_index(fields[iter_col], line_no);
    if (!trace.iterations.empty() && it <= trace.iterations.back())
      throw ConfigError("", "trace line " + std::to_string(line_no) + ": iterations not increasing");
    trace.iterations.push_back(it);
    trace.costs.push_back(parse_number(fields[cost_col], line_no));
  }
  return trace;
}

void write_comparison(std::ostream& out, const CostTrace& psmco, std::span<const CostTrace> psgd) {
  if (psmco.iterations.empty()) throw ConfigError("", "PSMCO trace has no rows");
  for (const auto& t : psgd) {
    if (t.iterations.empty()) throw ConfigError("", "PSGD trace '" + t.label + "' has no rows");
    if (t.problem != psmco.problem)
      throw ConfigError("", "problem mismatch: PSMCO trace is '" + psmco.problem +
                                "' but PSGD trace '" + t.label + "' is '" + t.problem + "'");
  }

  // Baseline columns: the two standard initializations first, then extras.
  std::vector<std::string> labels{"good_init", "bad_init"};
  for (const auto& t : psgd)
    if (std::find(labels.begin(), labels.end(), t.label) == labels.end()) labels.push_back(t.label);
  std::map<std::string, const CostTrace*> by_label;
  for (const auto& t : psgd) {
    if (by_label.count(t.label)) throw ConfigError("", "duplicate PSGD label '" + t.label + "'");
    by_label[t.label] = &t;
  }

  const CostTrace* axis = &psmco;
  for (const auto& t : psgd)
    if (t.iterations.size() < axis->iterations.size()) axis = &t;

  out << "iter,f_psmco";
  for (const auto& l : labels) out << ",f_psgd_" << l << (by_label.count(l) ? "" : ":absent");
  out << '\n';
  auto cell = [&](double v) { return std::isnan(v) ? std::string() : format_number(v); };
  for (std::size_t it : axis->iterations) {
    out << it << ',' << cell(hold_value(psmco, it));
    for (const auto& l : labels) {
      out << ',';
      if (auto f = by_label.find(l); f != by_label.end()) out << cell(hold_value(*f->second, it));
    }
    out << '\n';
  }
}

}  // namespace psmco::harness
