#include "toff/scenario_file.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "toff/error.hpp"

namespace toff {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"session", {"mean_seconds"}},
      {"macro", {"family", "mean_seconds", "variance_seconds2"}},
      {"femto", {"family", "mean_seconds", "variance_seconds2"}},
      {"threshold", {"mean_seconds"}},
      {"simulation", {"replications", "seed", "counting_mode", "batch_count", "threads"}},
      {"optimizer",
       {"delta_per_second", "min_threshold_mean_seconds", "epsilon_per_second", "tolerance",
        "grid_points"}},
  };
  return keys;
}

class Document {
 public:
  explicit Document(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  const Entry* find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Entry& require(const std::string& key) const {
    const Entry* e = find(key);
    if (e == nullptr) throw ParseError(0, "missing required key " + key);
    return *e;
  }

  double positive(const std::string& key) const { return positive(key, require(key)); }

  std::optional<double> optional_positive(const std::string& key) const {
    const Entry* e = find(key);
    if (e == nullptr) return std::nullopt;
    return positive(key, *e);
  }

  std::optional<std::uint64_t> optional_count(const std::string& key, std::uint64_t min) const {
    const Entry* e = find(key);
    if (e == nullptr) return std::nullopt;
    const std::string& v = e->value;
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError(e->line, key + " must be a non-negative integer, got '" + v + "'");
    }
    errno = 0;
    const unsigned long long n = std::strtoull(v.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ParseError(e->line, key + " is out of range");
    if (n < min) {
      throw ParseError(e->line, key + " must be >= " + std::to_string(min) + ", got " + v);
    }
    return n;
  }

 private:
  static double positive(const std::string& key, const Entry& e) {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(e.value.c_str(), &end);
    if (e.value.empty() || end != e.value.c_str() + e.value.size() || errno == ERANGE) {
      throw ParseError(e.line, key + " must be a number, got '" + e.value + "'");
    }
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ParseError(e.line, key + " must be finite and > 0, got " + e.value);
    }
    return x;
  }

  std::map<std::string, Entry> entries_;
};

ResidenceLaw read_law(const Document& doc, const std::string& section) {
  Family family = Family::Gamma;
  if (const Entry* e = doc.find(section + ".family")) {
    try {
      family = parse_family(e->value);
    } catch (const DomainError& err) {
      throw ParseError(e->line, section + ".family: " + err.what());
    }
  }
  const double mean = doc.positive(section + ".mean_seconds");
  const std::string var_key = section + ".variance_seconds2";
  if (family == Family::Gamma) {
    return ResidenceLaw::gamma(mean, doc.positive(var_key));
  }
  if (const Entry* e = doc.find(var_key)) {
    const double v = doc.optional_positive(var_key).value();
    if (std::abs(v - mean * mean) > 1e-9 * mean * mean) {
      throw ParseError(e->line, var_key + " must equal mean_seconds^2 for an exponential law");
    }
  }
  return ResidenceLaw::exponential(mean);
}

}  // namespace

ScenarioParams Scenario::params() const {
  if (!threshold_mean) throw DomainError("threshold.mean_seconds is required for this command");
  return params_at(1.0 / *threshold_mean);
}

ScenarioParams Scenario::params_at(double threshold_rate) const {
  ScenarioParams p{1.0 / session_mean, macro, femto, threshold_rate};
  p.validate();
  return p;
}

OptimizerConfig Scenario::optimizer() const {
  OptimizerConfig cfg = OptimizerConfig::defaults_for(params_at(1.0));
  if (delta) {
    cfg.delta = *delta;
    cfg.epsilon_rate = cfg.delta * 1e-9;
  }
  if (epsilon) cfg.epsilon_rate = *epsilon;
  if (tolerance) cfg.tolerance = *tolerance;
  if (grid_points) cfg.grid_points = *grid_points;
  cfg.validate();
  return cfg;
}

Scenario parse_scenario(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (schema().count(section) == 0) {
        throw ParseError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ParseError(line_no, "key '" + key + "' outside any section");
    if (schema().at(section).count(key) == 0) {
      throw ParseError(line_no, "unknown key " + section + "." + key);
    }
    const std::string full = section + "." + key;
    if (entries.count(full) != 0) {
      throw ParseError(line_no, "duplicate key " + full + " (first set on line " +
                                    std::to_string(entries.at(full).line) + ")");
    }
    entries.emplace(full, Entry{value, line_no});
  }

  const Document doc(std::move(entries));
  Scenario s;
  s.session_mean = doc.positive("session.mean_seconds");
  s.macro = read_law(doc, "macro");
  s.femto = read_law(doc, "femto");
  s.threshold_mean = doc.optional_positive("threshold.mean_seconds");

  if (auto n = doc.optional_count("simulation.replications", 1)) s.simulation.replications = *n;
  if (auto n = doc.optional_count("simulation.seed", 0)) s.simulation.seed = *n;
  if (auto n = doc.optional_count("simulation.batch_count", 1)) s.simulation.batch_count = *n;
  if (auto n = doc.optional_count("simulation.threads", 0)) {
    s.simulation.threads = static_cast<unsigned>(*n);
  }
  if (const Entry* e = doc.find("simulation.counting_mode")) {
    try {
      s.simulation.counting_mode = parse_counting_mode(e->value);
    } catch (const DomainError& err) {
      throw ParseError(e->line, std::string("simulation.counting_mode: ") + err.what());
    }
  }

  const Entry* delta = doc.find("optimizer.delta_per_second");
  const Entry* min_mean = doc.find("optimizer.min_threshold_mean_seconds");
  if (delta != nullptr && min_mean != nullptr) {
    throw ParseError(min_mean->line,
                     "set only one of optimizer.delta_per_second and "
                     "optimizer.min_threshold_mean_seconds");
  }
  s.delta = doc.optional_positive("optimizer.delta_per_second");
  if (auto m = doc.optional_positive("optimizer.min_threshold_mean_seconds")) {
    s.delta = OptimizerConfig::delta_from_min_threshold_mean(*m);
  }
  s.epsilon = doc.optional_positive("optimizer.epsilon_per_second");
  s.tolerance = doc.optional_positive("optimizer.tolerance");
  if (auto n = doc.optional_count("optimizer.grid_points", 16)) {
    s.grid_points = static_cast<unsigned>(*n);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

std::string scenario_text(double session_mean, const ResidenceLaw& macro,
                          const ResidenceLaw& femto) {
  std::ostringstream out;
  out.precision(10);
  out << "[session]\nmean_seconds = " << session_mean << "\n";
  const auto law = [&out](const char* name, const ResidenceLaw& l) {
    out << "\n[" << name << "]\nfamily = " << to_string(l.family())
        << "\nmean_seconds = " << l.mean() << "\nvariance_seconds2 = " << l.variance() << "\n";
  };
  law("macro", macro);
  law("femto", femto);
  return out.str();
}

}  // namespace toff
