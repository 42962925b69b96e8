// besovlab command-line front end.
//
// Exit codes: 0 success (all checks pass), 1 a check failed, 2 usage or
// configuration error, 3 runtime error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "besovlab/auxiliary.hpp"
#include "besovlab/coefficients.hpp"
#include "besovlab/error.hpp"
#include "besovlab/estimators.hpp"
#include "besovlab/models.hpp"
#include "besovlab/parallel.hpp"
#include "besovlab/scenarios.hpp"
#include "json.hpp"

using namespace besovlab;

namespace {

std::vector<ScalePoint> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("scale,value", 0) != 0) throw UsageError(path + ": expected header scale,value[,stderr]");
  std::vector<ScalePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    try {
      out.push_back({std::stod(a), {std::stod(b), c.empty() ? 0.0 : std::stod(c), 0}});
    } catch (const std::logic_error&) {
      throw UsageError(path + ": malformed row '" + line + "'");
    }
  }
  return out;
}

void print_summary(const ScenarioReport& r, std::ostream& out) {
  out << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : r.checks) {
    out << "  " << (c.pass ? "pass " : "FAIL ") << std::left << std::setw(26) << c.check_id
        << " predicted " << std::setw(12) << c.predicted << " fitted " << std::setw(12) << c.fitted;
    if (c.fit) out << " +- " << c.fit->ci_halfwidth;
    out << "  (" << to_string(c.comparison) << " tol " << c.tolerance << ")\n";
  }
}

int report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  bool all = true;
  std::cout << j.value("name", "?") << "\n";
  for (const auto& c : j.at("checks")) {
    const bool pass = c.at("pass").get<bool>();
    all = all && pass;
    const auto& f = c.at("fitted");
    const double fitted = f.is_object() ? f.at("slope").get<double>() : f.get<double>();
    std::cout << "  " << (pass ? "pass " : "FAIL ") << std::left << std::setw(26)
              << c.at("check_id").get<std::string>() << " predicted " << std::setw(12)
              << c.at("predicted").get<double>() << " fitted " << fitted << "\n";
  }
  std::cout << (all ? "PASS" : "FAIL") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"besovlab: Monte Carlo experiments on SDE density regularity"};
  app.require_subcommand(1);

  std::size_t workers = default_workers();
  std::uint64_t seed = 20240917, stream_id = 0;

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate an ensemble and write it as CSV");
  std::string model_name = "brownian", sim_out;
  double t = 1.0, beta = 0.5, alpha_stable = 1.5, epsilon = 0.0;
  std::size_t steps = 64, paths = 1000, window = 0;
  sim->add_option("--model", model_name, "model name")->capture_default_str();
  sim->add_option("--t", t, "terminal time")->capture_default_str();
  sim->add_option("--steps", steps, "Euler steps")->capture_default_str();
  sim->add_option("--paths", paths, "number of paths")->capture_default_str();
  sim->add_option("--beta", beta, "regularity parameter of the model")->capture_default_str();
  sim->add_option("--alpha-stable", alpha_stable, "stable index (stable model)")->capture_default_str();
  sim->add_option("--epsilon", epsilon, "checkpoint window length (0: none)")->capture_default_str();
  sim->add_option("--window-steps", window, "steps inside the window")->capture_default_str();
  sim->add_option("--seed", seed, "master seed")->capture_default_str();
  sim->add_option("--stream", stream_id, "base stream id")->capture_default_str();
  sim->add_option("--workers", workers, "worker threads");
  sim->add_option("--out", sim_out, "output CSV (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "E[Delta_h^m phi(X)] from an ensemble CSV");
  std::string ens_path, family = "cosine";
  double phi_alpha = 0.5;
  int m = 1;
  std::vector<double> h;
  est->add_option("ensemble", ens_path, "ensemble CSV from 'simulate'")->required();
  est->add_option("--family", family, "cosine | kink | bump")->capture_default_str();
  est->add_option("--alpha", phi_alpha, "Hoelder exponent of the test function")->capture_default_str();
  est->add_option("--m", m, "difference order")->capture_default_str();
  est->add_option("--disp", h, "displacement vector h")->required();
  est->add_option("--workers", workers, "worker threads");

  // scaling
  auto* sc = app.add_subcommand("scaling", "fit a power law to a scale,value,stderr CSV");
  std::string sweep_path;
  sc->add_option("sweep", sweep_path, "CSV with header scale,value,stderr")->required();

  // scenario
  auto* scen = app.add_subcommand("scenario", "named experiments");
  scen->require_subcommand(1);
  auto* list = scen->add_subcommand("list", "list registered scenarios");
  auto* keys = scen->add_subcommand("keys", "documented config keys of a scenario");
  std::string keys_name;
  keys->add_option("name", keys_name)->required();
  auto* run = scen->add_subcommand("run", "run a scenario");
  std::string run_name, config_path, out_dir, format = "text";
  std::optional<std::uint64_t> run_seed;
  run->add_option("name", run_name, "scenario name")->required();
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--seed", run_seed, "master seed (overrides the config)");
  run->add_option("--out", out_dir, "artifact directory (overrides the config)");
  run->add_option("--workers", workers, "worker threads (default $BESOVLAB_WORKERS)");
  run->add_option("--format", format, "stdout format: text | json | csv")->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "summarise a JSON scenario report");
  std::string report_path;
  rep->add_option("file", report_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const auto model = model_by_name(model_name, beta, alpha_stable);
      const SeedSpec s{seed, stream_id};
      const auto ens = epsilon > 0.0
                           ? simulate_with_checkpoint(model, t, epsilon, steps, paths, s, {window, workers})
                           : simulate_ensemble(model, t, steps, paths, s, workers);
      if (sim_out.empty()) write_ensemble_csv(ens, std::cout);
      else write_ensemble_csv(ens, sim_out);
      return 0;
    }
    if (*est) {
      const auto ens = read_ensemble_csv(ens_path);
      TestFunctionParams params;
      params.omega = std::vector<double>(ens.dim(), 1.0);
      params.center = std::vector<double>(ens.dim(), 0.0);
      auto probe = make_test_function(family, phi_alpha, params);
      probe.m = m;
      const auto e = mc_weighted_difference(ens.endpoints, probe, h, {}, workers);
      std::cout << to_json(e).dump() << "\n";
      return 0;
    }
    if (*sc) {
      std::cout << to_json(fit_scaling(read_sweep_csv(sweep_path))).dump(2) << "\n";
      return 0;
    }
    if (*list) {
      for (const auto& s : list_scenarios())
        std::cout << std::left << std::setw(20) << s.name << s.description << "\n"
                  << std::setw(20) << "" << "anchor: " << s.anchor << "\n";
      return 0;
    }
    if (*keys) {
      for (const auto& k : scenario_keys(keys_name))
        std::cout << std::left << std::setw(28) << k.key << ' ' << std::setw(14) << k.default_value << ' ' << k.doc << "\n";
      return 0;
    }
    if (*run) {
      ScenarioConfig cfg;
      cfg.name = run_name;
      if (!config_path.empty()) {
        cfg = load_scenario_config(config_path, cfg);
        if (cfg.name != run_name)
          throw UsageError("config names scenario '" + cfg.name + "' but '" + run_name + "' was requested");
      }
      if (run_seed) cfg.seed.master_seed = *run_seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      cfg.workers = workers;
      const auto report = run_scenario(cfg);
      if (format == "json") std::cout << render_report(report, ReportFormat::json);
      else if (format == "csv") std::cout << render_report(report, ReportFormat::csv);
      else {
        print_summary(report, std::cout);
        std::cout << "wall time " << std::fixed << std::setprecision(1) << report.wall_time << " s\n";
      }
      return report.passed() ? 0 : 1;
    }
    if (*rep) return report_file(report_path);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
