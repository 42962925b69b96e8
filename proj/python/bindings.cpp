#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/numpy.h>

#include "besovlab/besov.hpp"
#include "besovlab/coefficients.hpp"
#include "besovlab/drivers.hpp"
#include "besovlab/error.hpp"
#include "besovlab/estimators.hpp"
#include "besovlab/models.hpp"
#include "besovlab/scenarios.hpp"

namespace py = pybind11;
using namespace besovlab;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Matrix from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() == 1) {
    Matrix m(a.shape(0), 1);
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
  }
  if (a.ndim() != 2) throw ParameterError("expected a 1-d or 2-d array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::dict fit_dict(const ScalingFit& f) {
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["ci"] = f.ci_halfwidth;
  d["n_points"] = f.n_points;
  d["residual_rms"] = f.residual_rms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monte Carlo experiments on the Besov regularity of SDE densities";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("normals", [](std::uint64_t seed, std::uint64_t stream_id, std::size_t n) {
    Stream s({seed, stream_id});
    py::array_t<double> out(n);
    auto* p = out.mutable_data();
    for (std::size_t i = 0; i < n; ++i) p[i] = s.normal();
    return out;
  }, py::arg("seed"), py::arg("stream_id"), py::arg("n"));

  m.def("stable_increments", [](std::uint64_t seed, std::uint64_t stream_id, std::size_t n,
                                double alpha_stable, double scale, double dt) {
    Stream s({seed, stream_id});
    const auto v = stable_increments(s, n, {alpha_stable, scale}, dt);
    return py::array_t<double>(v.size(), v.data());
  }, py::arg("seed"), py::arg("stream_id"), py::arg("n"), py::arg("alpha_stable"),
     py::arg("scale") = 1.0, py::arg("dt") = 1.0);

  m.def("model_names", &model_names);

  m.def("simulate", [](const std::string& model, double t, std::size_t n_steps, std::size_t n_paths,
                       std::uint64_t seed, std::uint64_t stream_id, double beta, double alpha_stable,
                       std::size_t workers) {
    const auto spec = model_by_name(model, beta, alpha_stable);
    PathEnsemble ens;
    {
      py::gil_scoped_release release;
      ens = simulate_ensemble(spec, t, n_steps, n_paths, {seed, stream_id}, workers);
    }
    return to_numpy(ens.endpoints);
  }, py::arg("model"), py::arg("t"), py::arg("n_steps"), py::arg("n_paths"), py::arg("seed") = 0,
     py::arg("stream_id") = 0, py::arg("beta") = 0.5, py::arg("alpha_stable") = 1.5,
     py::arg("workers") = 1);

  m.def("mc_difference", [](py::array_t<double> samples, const std::string& family, double alpha,
                            int order, std::vector<double> h) {
    const auto x = from_numpy(samples);
    TestFunctionParams params;
    params.omega.assign(x.cols(), 1.0);
    params.center.assign(x.cols(), 0.0);
    auto probe = make_test_function(family, alpha, params);
    probe.m = order;
    const auto e = mc_weighted_difference(x, probe, h);
    return py::make_tuple(e.value, e.std_error);
  }, py::arg("samples"), py::arg("family"), py::arg("alpha"), py::arg("m"), py::arg("h"),
     "E[Delta_h^m phi(X)] with its batch-means standard error");

  m.def("gaussian_difference_l1", [](std::vector<double> cov, std::size_t d, double epsilon,
                                     std::vector<double> h, int order) {
    return gaussian_difference_l1(cov, d, epsilon, h, order);
  }, py::arg("cov"), py::arg("d"), py::arg("epsilon"), py::arg("h"), py::arg("m"));

  m.def("fit_scaling", [](std::vector<double> scales, std::vector<double> values,
                          std::vector<double> stderrs) {
    if (scales.size() != values.size() || (!stderrs.empty() && stderrs.size() != values.size()))
      throw ParameterError("scales, values and stderrs must have equal length");
    std::vector<ScalePoint> pts;
    for (std::size_t i = 0; i < scales.size(); ++i)
      pts.push_back({scales[i], {values[i], stderrs.empty() ? 0.0 : stderrs[i], 0}});
    return fit_dict(fit_scaling(pts));
  }, py::arg("scales"), py::arg("values"), py::arg("stderrs") = std::vector<double>{});

  m.def("epsilon_schedule", [](double h_norm, double t, double alpha, int order, double theta,
                               double a0, double delta) {
    ExponentParams p{alpha, order, theta, a0, 1.0, delta, std::nullopt};
    return epsilon_schedule(h_norm, t, p);
  }, py::arg("h_norm"), py::arg("t"), py::arg("alpha") = 0.5, py::arg("m") = 2,
     py::arg("theta") = 2.0, py::arg("a0") = 0.5, py::arg("delta") = 0.0);

  m.def("a0_from_ae_rate", &a0_from_ae_rate, py::arg("theta"), py::arg("rate"));
  m.def("rough_drift_exponent", &rough_drift_exponent, py::arg("p"), py::arg("q"), py::arg("d"),
        py::arg("gamma"));
  m.def("levy_feasibility", [](double alpha_stable, double beta, double p, double q, std::size_t d,
                               bool constant_sigma) {
    const auto f = levy_feasibility(alpha_stable, beta, p, q, d, constant_sigma);
    py::dict out;
    out["kappa"] = f.kappa;
    out["e_low"] = f.e_low;
    out["e_high"] = f.e_high;
    out["feasible"] = f.feasible;
    out["closed_form"] = f.closed_form;
    return out;
  }, py::arg("alpha_stable"), py::arg("beta"), py::arg("p"), py::arg("q"), py::arg("d") = 1,
     py::arg("constant_sigma") = false);

  m.def("list_scenarios", [] {
    py::list out;
    for (const auto& s : list_scenarios()) {
      py::dict d;
      d["name"] = s.name;
      d["anchor"] = s.anchor;
      d["description"] = s.description;
      out.append(d);
    }
    return out;
  });

  m.def("scenario_keys", [](const std::string& name) {
    py::list out;
    for (const auto& k : scenario_keys(name)) out.append(py::make_tuple(k.key, k.default_value, k.doc));
    return out;
  });

  m.def("run_scenario", [](const std::string& name, const std::string& config_text,
                           std::size_t workers) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg = parse_scenario_config(config_text, cfg);
    cfg.workers = workers;
    std::string json;
    {
      py::gil_scoped_release release;
      json = render_report(run_scenario(cfg), ReportFormat::json);
    }
    return py::module_::import("json").attr("loads")(json);
  }, py::arg("name"), py::arg("config") = "", py::arg("workers") = 1,
     "Runs a scenario with key=value overrides and returns the JSON report as a dict");
}
