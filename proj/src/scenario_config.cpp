#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "besovlab/error.hpp"
#include "besovlab/scenarios.hpp"

namespace besovlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  try {
    // 2^-3 style dyadic literals
    if (const auto caret = v.find('^'); caret != std::string::npos) {
      std::size_t used = 0;
      const double base = std::stod(v.substr(0, caret), &used);
      if (used != caret) throw std::invalid_argument(v);
      const std::string ex = v.substr(caret + 1);
      const double exponent = std::stod(ex, &used);
      if (used != ex.size()) throw std::invalid_argument(v);
      return std::pow(base, exponent);
    }
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw UsageError("config key '" + key + "': cannot parse '" + v + "' as a number");
  }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  std::size_t used = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw UsageError("config key '" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_real(key, item));
  }
  if (out.empty()) throw UsageError("config key '" + key + "' needs at least one value");
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text, ScenarioConfig cfg) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    if (key == "name") cfg.name = value;
    else if (key == "seed") cfg.seed.master_seed = parse_unsigned(key, value);
    else if (key == "stream_id") cfg.seed.stream_id = parse_unsigned(key, value);
    else if (key == "n_paths") cfg.n_paths = parse_unsigned(key, value);
    else if (key == "t") cfg.t = parse_real(key, value);
    else if (key == "epsilon_sweep") cfg.epsilon_sweep = parse_list(key, value);
    else if (key == "h_sweep") cfg.h_sweep = parse_list(key, value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "workers") cfg.workers = parse_unsigned(key, value);
    else if (key.rfind("tol.", 0) == 0) cfg.tolerances[key.substr(4)] = parse_real(key, value);
    else cfg.params[key] = parse_real(key, value);
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path, ScenarioConfig base) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << file.rdbuf();
  return parse_scenario_config(ss.str(), std::move(base));
}

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::within: return "within";
    case Comparison::at_most: return "at_most";
    case Comparison::at_least: return "at_least";
  }
  return "unknown";
}

bool ScenarioReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

const CheckRecord& ScenarioReport::check(const std::string& id) const {
  for (const auto& c : checks)
    if (c.check_id == id) return c;
  throw StateError("report '" + name + "' has no check '" + id + "'");
}

namespace {

nlohmann::ordered_json report_json(const ScenarioReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["anchor"] = r.anchor;
  j["description"] = r.description;
  j["pass"] = r.passed();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json e;
    e["check_id"] = c.check_id;
    e["description"] = c.description;
    e["anchor"] = c.anchor;
    e["predicted"] = c.predicted;
    if (c.fit) e["fitted"] = to_json(*c.fit);
    else e["fitted"] = c.fitted;
    e["tolerance"] = c.tolerance;
    e["comparison"] = to_string(c.comparison);
    e["pass"] = c.pass;
    checks.push_back(e);
  }
  j["checks"] = checks;
  nlohmann::ordered_json echo;
  for (const auto& [k, v] : r.config_echo) echo[k] = v;
  j["config"] = echo;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string render_report(const ScenarioReport& r, ReportFormat format) {
  if (format == ReportFormat::json) return report_json(r).dump(2) + "\n";
  std::ostringstream out;
  out << std::setprecision(17);
  out << "scenario,check_id,anchor,predicted,fitted,ci_halfwidth,n_points,tolerance,comparison,pass\n";
  for (const auto& c : r.checks) {
    out << csv_field(r.name) << ',' << csv_field(c.check_id) << ',' << csv_field(c.anchor) << ','
        << c.predicted << ',' << c.fitted << ',';
    if (c.fit) out << c.fit->ci_halfwidth << ',' << c.fit->n_points;
    else out << ',';
    out << ',' << c.tolerance << ',' << to_string(c.comparison) << ',' << (c.pass ? "true" : "false")
        << '\n';
  }
  return out.str();
}

void emit_report(const ScenarioReport& report, ReportFormat format, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << render_report(report, format);
  if (!file) throw IoError("write failed for " + path);
}

}  // namespace besovlab
