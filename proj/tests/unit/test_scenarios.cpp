#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "besovlab/error.hpp"
#include "besovlab/scenarios.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace besovlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig small_bulk_bm() {
  return parse_scenario_config(
      "name = bulk_bm\n"
      "n_paths = 20000\n"
      "ae_paths = 2000\n"
      "epsilon_sweep = 2^-3, 2^-4\n"
      "tol.kde_h_slope = 0.5   # small sample\n");
}

}  // namespace

TEST_CASE("registry: names unique, anchors and descriptions present") {
  const auto all = list_scenarios();
  CHECK(all.size() == 9);
  std::set<std::string> names;
  for (const auto& s : all) {
    names.insert(s.name);
    CHECK_FALSE(s.anchor.empty());
    CHECK_FALSE(s.description.empty());
    const auto keys = scenario_keys(s.name);
    for (const auto& k : keys) CHECK_FALSE(k.doc.empty());
  }
  CHECK(names.size() == all.size());
  for (const char* n : {"bulk_bm", "bulk_holder_sigma", "morereg_drift", "hypoelliptic",
                        "weighted_singular", "squared_bessel", "pathdep", "levy_stable",
                        "rough_drift"})
    CHECK(names.count(n) == 1);
}

TEST_CASE("config parsing: literals, comments, errors") {
  const auto c = parse_scenario_config(
      "# comment\nname=pathdep\nseed = 7\nepsilon_sweep = 0.125, 2^-4\nh_sweep=2^-2\n"
      "beta = 0.25\ntol.pe_envelope = 0.5\nworkers = 3\n");
  CHECK(c.name == "pathdep");
  CHECK(c.seed.master_seed == 7);
  CHECK(c.epsilon_sweep == std::vector<double>{0.125, 0.0625});
  CHECK(c.h_sweep == std::vector<double>{0.25});
  CHECK(c.params.at("beta") == 0.25);
  CHECK(c.tolerances.at("pe_envelope") == 0.5);
  CHECK(c.workers == 3);
  CHECK_THROWS_AS(parse_scenario_config("no equals sign"), UsageError);
  CHECK_THROWS_AS(parse_scenario_config("t = abc"), UsageError);
  CHECK_THROWS_AS(parse_scenario_config("seed = -1"), UsageError);
  CHECK_THROWS_AS(load_scenario_config("/nonexistent/config.txt"), IoError);
}

TEST_CASE("validation happens before any simulation") {
  ScenarioConfig c;
  c.name = "no_such_scenario";
  CHECK_THROWS_AS(run_scenario(c), UsageError);

  c.name = "bulk_holder_sigma";
  c.epsilon_sweep = {0.5, 1.0};  // epsilon >= t
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.epsilon_sweep = {0.3};
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.epsilon_sweep = {};
  c.h_sweep = {0.3};
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.h_sweep = {2.0};
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.h_sweep = {};
  c.params["unknown_knob"] = 1.0;
  CHECK_THROWS_AS(run_scenario(c), UsageError);
  c.params = {{"beta", 1.5}};
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.params = {{"m", 2.5}};
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.params = {};
  c.tolerances["pe_h_slope"] = 0.0;
  CHECK_THROWS_AS(run_scenario(c), ParameterError);
  c.tolerances = {{"no_such_check", 0.1}};
  CHECK_THROWS_AS(run_scenario(c), UsageError);
  c.tolerances = {};
  c.n_paths = 10;
  CHECK_THROWS_AS(run_scenario(c), ParameterError);

  ScenarioConfig r;
  r.name = "rough_drift";
  r.epsilon_sweep = {0.125};  // this scenario has no epsilon sweep
  CHECK_THROWS_AS(run_scenario(r), UsageError);
}

TEST_CASE("reports: overall pass, byte-stable emission, JSON round trip, CSV header") {
  const auto report = run_scenario(small_bulk_bm());
  CHECK(report.checks.size() == 3);
  bool all = true;
  for (const auto& c : report.checks) {
    all = all && c.pass;
    CHECK_FALSE(c.anchor.empty());
  }
  CHECK(report.passed() == all);
  CHECK_THROWS_AS(report.check("missing"), StateError);

  const auto dir = std::filesystem::temp_directory_path() / "besovlab_test_reports";
  std::filesystem::create_directories(dir);
  emit_report(report, ReportFormat::json, (dir / "a.json").string());
  emit_report(report, ReportFormat::json, (dir / "b.json").string());
  emit_report(report, ReportFormat::csv, (dir / "a.csv").string());
  emit_report(report, ReportFormat::csv, (dir / "b.csv").string());
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto j = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(j.at("name") == "bulk_bm");
  CHECK(j.at("checks").size() == 3);
  CHECK(j.at("checks")[0].at("fitted").at("slope").get<double>() == report.checks[0].fitted);
  CHECK(j.at("config").at("n_paths") == "20000");

  const auto csv = slurp(dir / "a.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "scenario,check_id,anchor,predicted,fitted,ci_halfwidth,n_points,tolerance,comparison,pass");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  CHECK_THROWS_AS(emit_report(report, ReportFormat::json, "/nonexistent/dir/r.json"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical configs give identical artifacts; worker count is inert") {
  const auto base = std::filesystem::temp_directory_path() / "besovlab_test_determinism";
  std::filesystem::remove_all(base);
  auto cfg = small_bulk_bm();
  std::vector<std::string> runs;
  for (std::size_t w : {1, 3}) {
    cfg.workers = w;
    cfg.output_dir = (base / std::to_string(w)).string();
    run_scenario(cfg);
    std::string all;
    for (const char* f : {"bulk_bm.json", "bulk_bm.csv", "bulk_bm_kde_h.csv"})
      all += slurp(std::filesystem::path(cfg.output_dir) / f);
    runs.push_back(all);
  }
  CHECK(runs[0] == runs[1]);
  std::filesystem::remove_all(base);
}
