#include "besovlab/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include "besovlab/auxiliary.hpp"
#include "besovlab/besov.hpp"
#include "besovlab/coefficients.hpp"
#include "besovlab/error.hpp"
#include "besovlab/linalg.hpp"
#include "besovlab/models.hpp"
#include "besovlab/parallel.hpp"

namespace besovlab {

namespace {

constexpr double kExact = 1e-12;

struct ParamDef {
  std::string key;
  double value;
  std::string doc;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool integer = false;
};

struct CheckDef {
  std::string id;
  std::string anchor;
  std::string doc;
  double tolerance;
  Comparison comparison;
};

class Context;
using Runner = std::function<void(const Context&, ScenarioReport&)>;

struct ScenarioDef {
  std::string name;
  std::string anchor;
  std::string description;
  std::size_t n_paths = 100000;
  double t = 1.0;
  std::vector<double> epsilon_sweep;  // empty: the scenario has no epsilon sweep
  std::vector<double> h_sweep;        // empty: the scenario has no h sweep
  std::vector<ParamDef> params;
  std::vector<CheckDef> checks;
  Runner run;
};

std::vector<double> dyadic(int k_min, int k_max, double scale = 1.0) {
  std::vector<double> out;
  for (int k = k_min; k <= k_max; ++k) out.push_back(scale * std::exp2(-k));
  return out;
}

// shortest text that reads back to the same double
std::string fmt(double x) {
  char buf[40];
  if (x == std::round(x) && std::abs(x) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", x);
    return buf;
  }
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

bool is_dyadic_ratio(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return false;
  const double k = std::log2(x);
  return std::abs(k - std::round(k)) < 1e-9;
}

class Context {
 public:
  Context(const ScenarioDef& def, const ScenarioConfig& cfg) : def_(def) {
    seed = cfg.seed;
    workers = std::max<std::size_t>(1, cfg.workers);
    n_paths = cfg.n_paths.value_or(def.n_paths);
    t = cfg.t.value_or(def.t);
    if (n_paths < 2 * kDefaultBatches)
      throw ParameterError("n_paths must be at least " + std::to_string(2 * kDefaultBatches));
    if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("t must be positive");

    if (!cfg.epsilon_sweep.empty() && def.epsilon_sweep.empty())
      throw UsageError("scenario " + def.name + " has no epsilon sweep");
    if (!cfg.h_sweep.empty() && def.h_sweep.empty())
      throw UsageError("scenario " + def.name + " has no h sweep");
    // a default epsilon sweep is stored relative to t = 1
    epsilon = cfg.epsilon_sweep;
    if (epsilon.empty())
      for (double e : def.epsilon_sweep) epsilon.push_back(e * t);
    h = cfg.h_sweep.empty() ? def.h_sweep : cfg.h_sweep;
    for (double e : epsilon) {
      if (!(e > 0.0) || !(e < t))
        throw ParameterError("epsilon sweep entry " + fmt(e) + " must lie in (0, t)");
      if (!is_dyadic_ratio(t / e))
        throw ParameterError("epsilon sweep entry " + fmt(e) + " is not t * 2^-k");
    }
    for (double x : h) {
      if (!(x > 0.0) || x > 1.0 || !is_dyadic_ratio(x))
        throw ParameterError("h sweep entry " + fmt(x) + " is not 2^-k with k >= 0");
    }
    std::sort(epsilon.rbegin(), epsilon.rend());
    std::sort(h.rbegin(), h.rend());
    if (std::adjacent_find(epsilon.begin(), epsilon.end()) != epsilon.end() ||
        std::adjacent_find(h.begin(), h.end()) != h.end())
      throw ParameterError("sweep entries must be distinct");

    for (const auto& p : def.params) values_[p.key] = p.value;
    for (const auto& [key, value] : cfg.params) {
      const auto it = std::find_if(def.params.begin(), def.params.end(),
                                   [&](const ParamDef& p) { return p.key == key; });
      if (it == def.params.end())
        throw UsageError("unknown config key '" + key + "' for scenario " + def.name);
      if (!(value >= it->lo && value <= it->hi) ||
          (it->integer && value != std::round(value)))
        throw ParameterError("config key '" + key + "' = " + fmt(value) + " out of range");
      values_[key] = value;
    }
    for (const auto& c : def.checks) tolerances_[c.id] = c.tolerance;
    for (const auto& [id, value] : cfg.tolerances) {
      if (!tolerances_.count(id))
        throw UsageError("unknown check id 'tol." + id + "' for scenario " + def.name);
      if (!(value > 0.0) || !std::isfinite(value))
        throw ParameterError("tolerance for " + id + " must be positive");
      tolerances_[id] = value;
    }
  }

  double param(const std::string& key) const { return values_.at(key); }
  std::size_t count(const std::string& key) const {
    return static_cast<std::size_t>(values_.at(key));
  }
  int integer(const std::string& key) const { return static_cast<int>(values_.at(key)); }
  double tolerance(const std::string& id) const { return tolerances_.at(id); }
  const ScenarioDef& def() const { return def_; }

  /// Independent stream family for sub-run `run`: paths use stream ids
  /// base + path, so shifting by multiples of 2^32 keeps runs disjoint.
  SeedSpec sub_seed(std::uint64_t run) const {
    return {seed.master_seed, seed.stream_id + ((run + 1) << 32)};
  }

  std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("name", def_.name);
    out.emplace_back("seed", std::to_string(seed.master_seed));
    out.emplace_back("stream_id", std::to_string(seed.stream_id));
    out.emplace_back("n_paths", std::to_string(n_paths));
    out.emplace_back("t", fmt(t));
    if (!epsilon.empty()) out.emplace_back("epsilon_sweep", fmt_list(epsilon));
    if (!h.empty()) out.emplace_back("h_sweep", fmt_list(h));
    for (const auto& p : def_.params) out.emplace_back(p.key, fmt(values_.at(p.key)));
    for (const auto& c : def_.checks) out.emplace_back("tol." + c.id, fmt(tolerances_.at(c.id)));
    return out;
  }

  SeedSpec seed;
  std::size_t workers = 1;
  std::size_t n_paths = 0;
  double t = 1.0;
  std::vector<double> epsilon;  // decreasing
  std::vector<double> h;        // decreasing

 private:
  const ScenarioDef& def_;
  std::map<std::string, double> values_;
  std::map<std::string, double> tolerances_;
};

void record(ScenarioReport& report, const Context& ctx, const std::string& id, double predicted,
            double fitted, std::optional<ScalingFit> fit = std::nullopt) {
  const auto& checks = ctx.def().checks;
  const auto it =
      std::find_if(checks.begin(), checks.end(), [&](const CheckDef& c) { return c.id == id; });
  if (it == checks.end()) throw StateError("undeclared check " + id);
  CheckRecord r;
  r.check_id = id;
  r.description = it->doc;
  r.anchor = it->anchor;
  r.predicted = predicted;
  r.fitted = fitted;
  r.fit = std::move(fit);
  r.tolerance = ctx.tolerance(id);
  r.comparison = it->comparison;
  switch (r.comparison) {
    case Comparison::within: r.pass = std::abs(fitted - predicted) <= r.tolerance; break;
    case Comparison::at_most: r.pass = fitted <= predicted + r.tolerance; break;
    case Comparison::at_least: r.pass = fitted >= predicted - r.tolerance; break;
  }
  if (!std::isfinite(fitted)) r.pass = false;
  report.checks.push_back(std::move(r));
}

void record_fit(ScenarioReport& report, const Context& ctx, const std::string& id,
                double predicted, const ScalingFit& fit) {
  record(report, ctx, id, predicted, fit.slope, fit);
}

// ---------------------------------------------------------------- helpers

struct SweepRun {
  double epsilon;
  std::vector<CoupledEnsemble> coupled;  // one per auxiliary kind
};

/// Simulates one checkpointed ensemble per epsilon and couples it with every
/// requested auxiliary, dropping the retained noise afterwards.
std::vector<SweepRun> coupled_sweep(const Context& ctx, const ModelSpec& model,
                                    const std::vector<AuxKind>& aux, std::uint64_t run_base,
                                    std::size_t pre_steps, std::size_t window_steps,
                                    std::size_t n_paths) {
  std::vector<SweepRun> out;
  for (std::size_t k = 0; k < ctx.epsilon.size(); ++k) {
    const double eps = ctx.epsilon[k];
    const auto ens = simulate_with_checkpoint(model, ctx.t, eps, pre_steps + window_steps, n_paths,
                                              ctx.sub_seed(run_base + k),
                                              {window_steps, ctx.workers});
    SweepRun run{eps, {}};
    for (const auto& a : aux) run.coupled.push_back(build_coupled(ens, model, a, ctx.workers));
    out.push_back(std::move(run));
  }
  return out;
}

Matrix column(const Matrix& m, std::size_t j) {
  Matrix out(m.rows(), 1);
  for (std::size_t i = 0; i < m.rows(); ++i) out(i, 0) = m(i, j);
  return out;
}

CoupledEnsemble component(const CoupledEnsemble& c, std::size_t j) {
  CoupledEnsemble out = c;
  out.x_end = column(c.x_end, j);
  out.y_end = column(c.y_end, j);
  out.checkpoint = column(c.checkpoint, j);
  return out;
}

EstimateWithError moment(const CoupledEnsemble& c, double power, std::size_t workers) {
  const double p[] = {power};
  return coupling_error_moments(c, p, workers)[0];
}

EstimateWithError magnitude(EstimateWithError e) {
  e.value = std::abs(e.value);
  return e;
}

/// Displacement sweep where grid spacing divides every h.
GridFunction box_grid(double center, double halfwidth, double spacing) {
  const auto cells = static_cast<std::size_t>(std::ceil(halfwidth / spacing));
  return GridFunction({center - static_cast<double>(cells) * spacing}, spacing, {2 * cells + 1});
}

/// ||Delta_h^m p_hat||_{L^1} of the mollified density for every h. The error
/// bar is the spread across `batches` disjoint sub-sample estimates divided
/// by sqrt(batches); it is a rough indicator only (sub-sample KDEs carry more
/// noise bias than the full one).
std::vector<EstimateWithError> kde_difference_norms(const Matrix& samples, double bandwidth,
                                                    const GridFunction& target, int m,
                                                    const std::vector<double>& hs,
                                                    std::size_t batches = 16) {
  auto norms = [&](const Matrix& s) {
    const auto p = mollified_density(s, bandwidth, target);
    std::vector<double> out;
    for (double x : hs) {
      const double hv[] = {x};
      out.push_back(delta_m(p, m, hv).lp_norm(1.0));
    }
    return out;
  };
  const auto full = norms(samples);
  const std::size_t n = samples.rows();
  const std::size_t dim = samples.cols();
  std::vector<std::vector<double>> parts;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = n * b / batches, hi = n * (b + 1) / batches;
    Matrix sub(hi - lo, dim);
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j < dim; ++j) sub(i - lo, j) = samples(i, j);
    parts.push_back(norms(sub));
  }
  std::vector<EstimateWithError> out;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    std::vector<double> v;
    for (const auto& p : parts) v.push_back(p[k]);
    const double mean = pairwise_sum(v) / static_cast<double>(batches);
    std::vector<double> sq;
    for (double x : v) sq.push_back((x - mean) * (x - mean));
    const double var = pairwise_sum(sq) / static_cast<double>(batches - 1);
    out.push_back({full[k], std::sqrt(var / static_cast<double>(batches)), n});
  }
  return out;
}

/// Variance panel between the squared nondegeneracy floor and diffusion bound.
std::vector<double> variance_panel(double lo, double hi, std::size_t n = 9) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1)));
  return out;
}

double envelope_shape(double h, double eps, int m) {
  return std::pow(std::min(1.0, h / std::sqrt(eps)), m);
}

DifferenceProbe cosine_probe(double omega, int m) {
  auto probe = make_test_function("cosine", 0.5, {{omega}, {0.0}, 1.0});
  probe.m = m;
  return probe;
}

struct PePoint {
  double h;
  double epsilon;
  AePeSplit split;
};

std::vector<PePoint> pe_panel(const std::vector<SweepRun>& runs, std::size_t aux_index,
                              const DifferenceProbe& probe, const std::vector<double>& hs,
                              const WeightFn& weight, std::size_t workers) {
  std::vector<PePoint> out;
  for (const auto& run : runs)
    for (double x : hs) {
      const double hv[] = {x};
      out.push_back({x, run.epsilon, ae_pe_split(run.coupled[aux_index], probe, hv, weight, workers)});
    }
  return out;
}

/// Largest |pe| / (bound * C * (1 ^ h/sqrt(eps))^m) over a panel.
double envelope_ratio(const std::vector<PePoint>& panel, double bound, double c, int m) {
  double worst = 0.0;
  for (const auto& p : panel)
    worst = std::max(worst, std::abs(p.split.pe.value) / (bound * c * envelope_shape(p.h, p.epsilon, m)));
  return worst;
}

/// max |ae + pe - (total)| / max(1, |total|) where total is computed directly
/// from X_t (weighted by w(X_{t-eps}) through the three-term split when a
/// weight is present).
double telescoping_gap(const std::vector<SweepRun>& runs, std::size_t aux_index,
                       const DifferenceProbe& probe, const std::vector<double>& hs,
                       const WeightFn& weight, std::size_t workers) {
  double worst = 0.0;
  for (const auto& run : runs) {
    const auto& c = run.coupled[aux_index];
    for (double x : hs) {
      const double hv[] = {x};
      const auto split = ae_pe_split(c, probe, hv, weight, workers);
      const auto total = mc_weighted_difference(c.x_end, probe, hv, weight, workers);
      const double sum = split.ae.value + split.pe.value +
                         (split.weight_term ? split.weight_term->value : 0.0);
      worst = std::max(worst, std::abs(sum - total.value) / std::max(1.0, std::abs(total.value)));
    }
  }
  return worst;
}

std::vector<ScalePoint> pooled_pe_points(const std::vector<PePoint>& panel,
                                         const std::function<bool(double, double)>& keep) {
  std::vector<ScalePoint> out;
  for (const auto& p : panel)
    if (keep(p.h, p.epsilon)) out.push_back({p.h, magnitude(p.split.pe)});
  return out;
}

std::vector<ScalePoint> moment_points(const std::vector<SweepRun>& runs, std::size_t aux_index,
                                      double power, std::size_t workers,
                                      std::optional<std::size_t> comp = std::nullopt) {
  std::vector<ScalePoint> out;
  for (const auto& run : runs) {
    const auto& c = run.coupled[aux_index];
    out.push_back({run.epsilon, comp ? moment(component(c, *comp), power, workers)
                                     : moment(c, power, workers)});
  }
  return out;
}

void add_sweep(ScenarioReport& report, const std::string& name, std::vector<ScalePoint> points) {
  report.sweeps.push_back({name, std::move(points)});
}

ModelSpec with_x0(ModelSpec m, double x0) {
  m.x0 = {x0};
  return m;
}

// -------------------------------------------------------------- scenarios

void run_bulk_bm(const Context& ctx, ScenarioReport& report) {
  const auto model = brownian_model(1);
  const auto ens = simulate_ensemble(model, ctx.t, ctx.count("n_steps"), ctx.n_paths,
                                     ctx.sub_seed(0), ctx.workers);
  const double bw = ctx.param("bandwidth");
  const auto target =
      box_grid(0.0, ctx.param("box_halfwidth") * std::sqrt(ctx.t), ctx.param("grid_spacing"));
  const auto norms = kde_difference_norms(ens.endpoints, bw, target, 2, ctx.h);
  std::vector<ScalePoint> pts;
  for (std::size_t k = 0; k < ctx.h.size(); ++k) pts.push_back({ctx.h[k], norms[k]});
  add_sweep(report, "kde_h", pts);
  record_fit(report, ctx, "kde_h_slope", 2.0, fit_scaling(pts));

  // the mollified density of N(0, t) is N(0, t + bw^2): compare at the largest h
  const double cov[] = {ctx.t + bw * bw};
  const double h0[] = {ctx.h.front()};
  const double exact = gaussian_difference_l1(cov, 1, 1.0, h0, 2);
  record(report, ctx, "kde_vs_gaussian", 1.0, norms.front().value / exact);

  // constant coefficients: the frozen auxiliary reproduces X exactly
  const auto runs = coupled_sweep(ctx, model, {AuxKind{AuxTag::frozen, {}}}, 1,
                                  ctx.count("pre_steps"), ctx.count("window_steps"),
                                  ctx.count("ae_paths"));
  const auto probe = cosine_probe(1.0, 2);
  double worst = 0.0;
  for (const auto& run : runs) {
    const auto split = ae_pe_split(run.coupled[0], probe, h0, {}, ctx.workers);
    worst = std::max(worst, std::abs(split.ae.value));
  }
  record(report, ctx, "ae_zero", 0.0, worst);
}

void run_bulk_holder_sigma(const Context& ctx, ScenarioReport& report) {
  const double beta = ctx.param("beta");
  const int m = ctx.integer("m");
  const std::size_t pre = ctx.count("pre_steps"), window = ctx.count("window_steps");
  const AuxKind frozen{AuxTag::frozen, {}};

  const auto holder = holder_sigma_model(beta, ctx.param("amplitude"));
  const auto runs = coupled_sweep(ctx, holder, {frozen}, 0, pre, window, ctx.n_paths);
  const auto ae_pts = moment_points(runs, 0, 2.0, ctx.workers);
  add_sweep(report, "ae_moment", ae_pts);
  const auto ae_fit = fit_scaling(ae_pts);
  record_fit(report, ctx, "ae_moment_slope", 1.0 + beta, ae_fit);

  // theta = 2 converts the squared-moment rate into the first-moment rate
  record(report, ctx, "a0_from_rate", beta, a0_from_ae_rate(2.0, ae_fit.slope / 2.0));

  const auto probe = cosine_probe(ctx.param("omega"), m);
  const auto panel = pe_panel(runs, 0, probe, ctx.h, {}, ctx.workers);

  // nondegenerate sigma panel: each model contributes its variance range
  std::vector<std::pair<ModelSpec, std::vector<PePoint>>> models;
  const auto kink = kink_sigma_model(beta);
  const auto smooth = smooth_sigma_model();
  models.emplace_back(holder, panel);
  std::uint64_t base = 100;
  for (const auto* extra : {&kink, &smooth}) {
    const auto r = coupled_sweep(ctx, *extra, {frozen}, base, pre, window, ctx.n_paths);
    models.emplace_back(*extra, pe_panel(r, 0, probe, ctx.h, {}, ctx.workers));
    base += 100;
  }
  double worst = 0.0;
  for (const auto& [model, p] : models) {
    // the floor bounds det(sigma sigma^T), i.e. sigma^2 in one dimension
    const double lo = *model.coefficients.nondegeneracy_floor;
    const double hi = *model.coefficients.diffusion_bound;
    const auto variances = variance_panel(lo, hi * hi);
    const double c = fit_gaussian_envelope(variances, ctx.epsilon, ctx.h, m);
    worst = std::max(worst, envelope_ratio(p, probe.phi_norm_bound, c, m));
  }
  record(report, ctx, "pe_envelope", 1.0, worst);

  const auto pe_pts = pooled_pe_points(
      panel, [](double h, double e) { return h <= std::sqrt(e) / 4.0 * (1.0 + 1e-12); });
  add_sweep(report, "pe_h", pe_pts);
  record_fit(report, ctx, "pe_h_slope", static_cast<double>(m), fit_scaling(pe_pts));

  record(report, ctx, "telescoping", 0.0,
         telescoping_gap(runs, 0, probe, ctx.h, {}, ctx.workers));
}

void run_morereg_drift(const Context& ctx, ScenarioReport& report) {
  const double beta = ctx.param("beta");
  const std::size_t pre = ctx.count("pre_steps"), window = ctx.count("window_steps");
  const auto holder = holder_drift_model(beta, ctx.param("amplitude"));
  const auto runs = coupled_sweep(ctx, holder,
                                  {AuxKind{AuxTag::frozen, {}}, AuxKind{AuxTag::drift_frozen, {}}},
                                  0, pre, window, ctx.n_paths);
  const auto frozen_pts = moment_points(runs, 0, 1.0, ctx.workers);
  const auto df_pts = moment_points(runs, 1, 1.0, ctx.workers);
  add_sweep(report, "frozen_moment", frozen_pts);
  add_sweep(report, "drift_frozen_moment", df_pts);
  const auto frozen_fit = fit_scaling(frozen_pts);
  const auto df_fit = fit_scaling(df_pts);
  record_fit(report, ctx, "drift_frozen_slope", 1.0 + beta / 2.0, df_fit);
  record(report, ctx, "drift_frozen_gain", 0.0, df_fit.slope - frozen_fit.slope);

  const double amp = ctx.param("taylor_amplitude");
  const auto c1 = c1beta_drift_model(beta, amp);
  const auto taylor = coupled_sweep(ctx, c1, {AuxKind{AuxTag::taylor, c1beta_drift_jacobian(beta, amp)}},
                                    100, pre, window, ctx.n_paths);
  const auto t_pts = moment_points(taylor, 0, 1.0, ctx.workers);
  add_sweep(report, "taylor_moment", t_pts);
  record_fit(report, ctx, "taylor_slope", (3.0 + beta) / 2.0, fit_scaling(t_pts));
}

void run_hypoelliptic(const Context& ctx, ScenarioReport& report) {
  const double beta = ctx.param("beta");
  std::vector<ScalePoint> small, large;
  for (double e : ctx.epsilon) {
    const auto cov = hypo_conditional_covariance(e);
    const auto eig = symmetric_eigenvalues(cov.data(), 2);
    const auto [lo, hi] = std::minmax(eig[0], eig[1]);
    small.push_back({e, {lo, 0.0, 1}});
    large.push_back({e, {hi, 0.0, 1}});
  }
  add_sweep(report, "eig_small", small);
  add_sweep(report, "eig_large", large);
  record_fit(report, ctx, "eig_large_slope", 1.0, fit_scaling(large));
  record_fit(report, ctx, "eig_small_slope", 3.0, fit_scaling(small));

  // linear model: (X1_t - X1_{t-eps}, X2_t - X2_{t-eps} - eps X1_{t-eps}) is
  // the pair (B_eps, int B) of the conditional covariance
  const auto linear = hypoelliptic_linear_model();
  double worst = 0.0;
  double var_x2 = 0.0;
  for (std::size_t k = 0; k < ctx.epsilon.size(); ++k) {
    const double e = ctx.epsilon[k];
    const auto ens = simulate_with_checkpoint(
        linear, ctx.t, e, ctx.count("cov_pre_steps") + ctx.count("cov_window_steps"), ctx.n_paths,
        ctx.sub_seed(k), {ctx.count("cov_window_steps"), ctx.workers});
    const auto& x = ens.endpoints;
    const auto& c = *ens.checkpoints;
    const std::size_t n = x.rows();
    std::vector<double> a(n), b(n), aa(n), ab(n), bb(n), x2(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = x(i, 0) - c(i, 0);
      b[i] = x(i, 1) - c(i, 1) - e * c(i, 0);
      x2[i] = x(i, 1);
    }
    const double nn = static_cast<double>(n);
    const double ma = pairwise_sum(a) / nn, mb = pairwise_sum(b) / nn;
    for (std::size_t i = 0; i < n; ++i) {
      aa[i] = (a[i] - ma) * (a[i] - ma);
      ab[i] = (a[i] - ma) * (b[i] - mb);
      bb[i] = (b[i] - mb) * (b[i] - mb);
    }
    const auto exact = hypo_conditional_covariance(e);
    const double mc[] = {pairwise_sum(aa) / (nn - 1), pairwise_sum(ab) / (nn - 1),
                         pairwise_sum(bb) / (nn - 1)};
    const double ref[] = {exact(0, 0), exact(0, 1), exact(1, 1)};
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(mc[j] / ref[j] - 1.0));
    if (k == 0) {
      const double m2 = pairwise_sum(x2) / nn;
      std::vector<double> sq(n);
      for (std::size_t i = 0; i < n; ++i) sq[i] = (x2[i] - m2) * (x2[i] - m2);
      var_x2 = pairwise_sum(sq) / (nn - 1);
    }
  }
  record(report, ctx, "mc_covariance", 0.0, worst);
  record(report, ctx, "var_x2", 1.0, var_x2 / (ctx.t * ctx.t * ctx.t / 3.0));

  const double amp = ctx.param("amplitude");
  const auto model = hypoelliptic_model(beta, amp);
  const auto runs = coupled_sweep(ctx, model,
                                  {AuxKind{AuxTag::hypo_taylor, hypoelliptic_jacobian(beta, amp)}},
                                  100, ctx.count("pre_steps"), ctx.count("window_steps"),
                                  ctx.n_paths);
  const auto pts = moment_points(runs, 0, 1.0, ctx.workers, 1);
  add_sweep(report, "hypo_taylor_moment", pts);
  record_fit(report, ctx, "hypo_taylor_slope", 2.0, fit_scaling(pts));

  ExponentParams params;
  params.theta = 2.0 / 3.0;
  params.a0 = a0_from_ae_rate(params.theta, (3.0 + beta) / 2.0);
  params.beta = beta;
  record(report, ctx, "a_max", beta / 3.0, predicted_regularity(params, 0.0, ctx.t).a_max);
}

void run_weighted_singular(const Context& ctx, ScenarioReport& report) {
  const double beta = ctx.param("beta");
  const int m = ctx.integer("m");
  const auto model = degenerate_sigma_model(beta, ctx.param("x0"));
  const auto runs = coupled_sweep(ctx, model, {AuxKind{AuxTag::frozen, {}}}, 0,
                                  ctx.count("pre_steps"), ctx.count("window_steps"), ctx.n_paths);
  const auto probe = cosine_probe(ctx.param("omega"), m);
  const WeightFn weight = inverse_sigma_weight(model.coefficients, m);

  record(report, ctx, "telescoping", 0.0,
         telescoping_gap(runs, 0, probe, ctx.h, weight, ctx.workers));

  // sigma <= 1, so sigma^m G(h / (sigma sqrt(eps))) <= C (1 ^ h/sqrt(eps))^m with
  // C the unit-variance constant of the Gaussian envelope
  const double one[] = {1.0};
  const auto s_grid = dyadic(-8, 12);
  const double c = fit_gaussian_envelope(one, one, s_grid, m);
  const auto panel = pe_panel(runs, 0, probe, ctx.h, weight, ctx.workers);
  record(report, ctx, "pe_envelope", 1.0, envelope_ratio(panel, probe.phi_norm_bound, c, m));

  const auto pts = pooled_pe_points(
      panel, [](double h, double e) { return h <= std::sqrt(e) / 4.0 * (1.0 + 1e-12); });
  add_sweep(report, "pe_h", pts);
  record_fit(report, ctx, "pe_h_slope", static_cast<double>(m), fit_scaling(pts));
}

double bessel_cdf(double x, double t) { return x > 0.0 ? std::erf(std::sqrt(x / (2.0 * t))) : 0.0; }

void run_squared_bessel(const Context& ctx, ScenarioReport& report) {
  // cell averages of p_t(x) = (2 pi t x)^{-1/2} e^{-x/(2t)}, exact through the CDF
  const double dx = ctx.param("grid_spacing");
  const double lo = -ctx.param("grid_left") * ctx.t, hi = ctx.param("grid_right") * ctx.t;
  const auto cells = static_cast<std::size_t>(std::llround((hi - lo) / dx));
  GridFunction p({lo}, dx, {cells + 1});
  for (std::size_t i = 0; i <= cells; ++i) {
    const double x = lo + static_cast<double>(i) * dx;
    p[i] = (bessel_cdf(x + dx / 2.0, ctx.t) - bessel_cdf(x - dx / 2.0, ctx.t)) / dx;
  }
  std::vector<double> norms;
  std::vector<ScalePoint> pts;
  for (double x : ctx.h) {
    const double hv[] = {x};
    norms.push_back(delta_m(p, 2, hv).lp_norm(1.0));
    pts.push_back({x, {norms.back(), 0.0, 1}});
  }
  add_sweep(report, "analytic_h", pts);

  auto ratios = [&](double s) {
    std::vector<double> r;
    for (std::size_t k = 0; k < norms.size(); ++k) r.push_back(norms[k] / std::pow(ctx.h[k], s));
    return r;
  };
  const auto r_low = ratios(ctx.param("s_bounded"));
  const auto [mn, mx] = std::minmax_element(r_low.begin(), r_low.end());
  record(report, ctx, "bounded_ratio_spread", ctx.param("spread_bound"), *mx / *mn);

  const auto r_high = ratios(ctx.param("s_divergent"));
  record(report, ctx, "divergent_ratio_growth", 2.0, r_high.back() / r_high.front());
  double drops = 0.0;
  for (std::size_t k = 1; k < r_high.size(); ++k)
    if (!(r_high[k] > r_high[k - 1])) drops += 1.0;
  record(report, ctx, "divergent_ratio_monotone", 0.0, drops);

  const std::size_t tail = std::min<std::size_t>(ctx.count("slope_points"), pts.size());
  std::vector<ScalePoint> small(pts.end() - static_cast<std::ptrdiff_t>(tail), pts.end());
  record_fit(report, ctx, "small_h_slope", 0.5, fit_scaling(small));

  // Monte Carlo cross-check of the law against the analytic CDF
  const auto ens = simulate_ensemble(squared_bessel_model(), ctx.t, ctx.count("n_steps"),
                                     ctx.n_paths, ctx.sub_seed(0), ctx.workers);
  std::vector<double> xs(ens.endpoints.data().begin(), ens.endpoints.data().end());
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = bessel_cdf(xs[i], ctx.t);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n),
                   std::abs(static_cast<double>(i + 1) / n - f)});
  }
  record(report, ctx, "mc_ks", 0.0, ks);
}

void run_pathdep(const Context& ctx, ScenarioReport& report) {
  const double beta = ctx.param("beta");
  const std::size_t pre = ctx.count("pre_steps"), window = ctx.count("window_steps");
  const AuxKind frozen{AuxTag::frozen, {}};
  const auto model = running_max_model(beta);

  // started at |x0| >= 1 the profile is saturated, so sigma is constant
  const auto saturated = with_x0(model, ctx.param("saturated_x0"));
  const auto ens = simulate_with_checkpoint(saturated, ctx.t, ctx.epsilon.back(), pre + window,
                                            ctx.count("exact_paths"), ctx.sub_seed(200),
                                            {window, ctx.workers});
  const auto exact = build_coupled(ens, saturated, frozen, ctx.workers);
  double gap = 0.0;
  for (std::size_t i = 0; i < exact.x_end.rows(); ++i)
    gap = std::max(gap, std::abs(exact.x_end(i, 0) - exact.y_end(i, 0)));
  record(report, ctx, "saturated_exact", 0.0, gap);

  const auto runs = coupled_sweep(ctx, model, {frozen}, 0, pre, window, ctx.n_paths);
  const auto pts = moment_points(runs, 0, 2.0, ctx.workers);
  add_sweep(report, "ae_moment", pts);
  record_fit(report, ctx, "ae_moment_slope", 1.0 + beta, fit_scaling(pts));

  const int m = ctx.integer("m");
  const auto probe = cosine_probe(ctx.param("omega"), m);
  const auto panel = pe_panel(runs, 0, probe, ctx.h, {}, ctx.workers);
  const double smax = running_max_profile(beta, 1.0);
  const auto variances = variance_panel(1.0, smax * smax);
  const double c = fit_gaussian_envelope(variances, ctx.epsilon, ctx.h, m);
  record(report, ctx, "pe_envelope", 1.0, envelope_ratio(panel, probe.phi_norm_bound, c, m));
}

void run_levy_stable(const Context& ctx, ScenarioReport& report) {
  const double alpha = ctx.param("alpha_stable");
  const double beta = ctx.param("beta");
  const StableDriverSpec spec{alpha, 1.0};
  spec.validate(true);

  // kernel of the driver: density of t^{1/alpha} S, mollified at a bandwidth
  // proportional to t^{1/alpha} so every level sees the same relative smoothing
  const auto target = box_grid(0.0, ctx.param("box_halfwidth"), ctx.param("grid_spacing"));
  const auto kernel_h = dyadic(ctx.integer("kernel_h_kmin"), ctx.integer("kernel_h_kmax"));
  std::vector<ScalePoint> h_pts, t_pts;
  for (int level = 0; level < ctx.integer("t_levels"); ++level) {
    const double tl = ctx.t * std::exp2(-level);
    Stream stream(ctx.sub_seed(300 + static_cast<std::uint64_t>(level)));
    const auto draws = stable_increments(stream, ctx.count("kernel_paths"), spec, tl);
    Matrix samples(draws.size(), 1);
    std::copy(draws.begin(), draws.end(), samples.data().begin());
    const double bw = ctx.param("bandwidth_factor") * std::pow(tl, 1.0 / alpha);
    const auto norms = kde_difference_norms(samples, bw, target, 1,
                                            level == 0 ? kernel_h : std::vector<double>{kernel_h.back()});
    if (level == 0)
      for (std::size_t k = 0; k < kernel_h.size(); ++k) h_pts.push_back({kernel_h[k], norms[k]});
    t_pts.push_back({tl, norms.back()});
  }
  add_sweep(report, "kernel_h", h_pts);
  add_sweep(report, "kernel_t", t_pts);
  record_fit(report, ctx, "kernel_h_slope", 1.0, fit_scaling(h_pts));
  record_fit(report, ctx, "kernel_t_slope", -1.0 / alpha, fit_scaling(t_pts));

  const auto model = stable_model(alpha, beta, ctx.param("amplitude"));
  const auto runs = coupled_sweep(ctx, model, {AuxKind{AuxTag::levy_frozen, {}}}, 0,
                                  ctx.count("pre_steps"), ctx.count("window_steps"), ctx.n_paths);
  const double r = ctx.param("moment_power");
  const auto m_pts = moment_points(runs, 0, r, ctx.workers);
  add_sweep(report, "ae_moment", m_pts);
  record_fit(report, ctx, "ae_moment_slope", r * (1.0 + beta) / alpha, fit_scaling(m_pts));

  auto probe = make_test_function("kink", ctx.param("kink_alpha"),
                                  {{1.0}, {ctx.param("kink_center")}, 1.0});
  probe.m = 1;
  const auto panel = pe_panel(runs, 0, probe, ctx.h, {}, ctx.workers);
  const auto pe_pts = pooled_pe_points(panel, [alpha](double h, double e) {
    return h <= std::pow(e, 1.0 / alpha) / 4.0 * (1.0 + 1e-12);
  });
  add_sweep(report, "pe_h", pe_pts);
  record_fit(report, ctx, "pe_h_slope", 1.0, fit_scaling(pe_pts));

  // constant sigma: kappa = 1/q' on the whole admissible range
  const double p = ctx.param("p"), q = ctx.param("q");
  const auto feas = levy_feasibility(alpha, beta, p, q, 1, true);
  const double q_conj = q / (q - 1.0);
  const double k = 1.0 / q_conj;
  record(report, ctx, "kappa", k, feas.kappa);
  record(report, ctx, "window_low", k / (p * (alpha * k - 1.0) - 1.0), feas.e_low);
}

void run_rough_drift(const Context& ctx, ScenarioReport& report) {
  const double gamma_sing = ctx.param("gamma_sing");
  const double p = ctx.param("p");
  const double gamma = ctx.param("besov_index");
  if (!(p * gamma_sing < 1.0))
    throw ParameterError("drift is in L^p only for p < 1/gamma_sing");
  // q = infinity (time-independent drift) and d = 1
  record(report, ctx, "membership", 1.0, 1.0 / p);
  const double e_gamma = rough_drift_exponent(p, kInfinity, 1, gamma);
  record(report, ctx, "exponent_arithmetic", gamma / (1.0 - 1.0 / p), e_gamma);

  const auto model = rough_drift_model(gamma_sing, ctx.param("truncation"), ctx.param("center"));
  const auto start = with_x0(model, ctx.param("x0"));
  const double dx = ctx.param("grid_spacing");
  const auto target = box_grid(ctx.param("x0"), ctx.param("box_halfwidth"), dx);
  const auto all_h = dyadic(0, static_cast<int>(std::lround(-std::log2(dx))));
  std::vector<ScalePoint> pts;
  for (int level = 0; level < ctx.integer("t_levels"); ++level) {
    const double tl = ctx.t * std::exp2(-level);
    const auto ens = simulate_ensemble(start, tl, ctx.count("n_steps"), ctx.n_paths,
                                       ctx.sub_seed(static_cast<std::uint64_t>(level)), ctx.workers);
    const double bw = ctx.param("bandwidth_factor") * std::sqrt(tl);
    std::vector<Displacement> hs;
    for (double x : all_h)
      if (x >= 2.0 * bw) hs.push_back({x});
    const auto dens = mollified_density(ens.endpoints, bw, target);
    pts.push_back({tl, {besov_seminorm(dens, gamma, 1.0, kInfinity, 1, hs), 0.0, 1}});
  }
  add_sweep(report, "seminorm_t", pts);
  const auto fit = fit_scaling(pts);
  // consistency only: the observed blow-up must not exceed the proven one
  record(report, ctx, "time_singularity", e_gamma, -fit.slope, fit);
}

// -------------------------------------------------------------- registry

const std::string kAeHolder = "Ae ~ eps^(1+beta) for beta-Hoelder sigma";
const std::string kPeKernel = "Pe <~ (1 ^ |h|/sqrt(eps))^m from the frozen Gaussian kernel";

std::vector<ScenarioDef> build_registry() {
  std::vector<ScenarioDef> r;
  const auto eps6 = dyadic(3, 8);
  const auto h6 = dyadic(2, 7);

  r.push_back({"bulk_bm",
               "bulk decomposition, Gaussian baseline: smooth density, Ae = 0",
               "Brownian motion: mollified density is smooth (slope 2 in h) and the frozen auxiliary is exact",
               1000000, 1.0, eps6, h6,
               {{"n_steps", 16, "Euler steps for the density ensemble", 1, 1e7, true},
                {"bandwidth", 0.2, "Gaussian mollifier bandwidth", 0.0, 1e3},
                {"grid_spacing", 0x1p-7, "density grid spacing (must divide every h)", 0.0, 1.0},
                {"box_halfwidth", 6.0, "density box half-width in units of sqrt(t)", 1.0, 1e3},
                {"ae_paths", 100000, "paths per epsilon for the Ae check", 64, 1e9, true},
                {"pre_steps", 16, "Euler steps on [0, t-eps]", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t]", 1, 1e7, true}},
               {{"kde_h_slope", "smooth density: ||Delta_h^2 p||_1 ~ |h|^2",
                 "slope of log ||Delta_h^2 p_hat||_1 against log h", 0.2, Comparison::within},
                {"kde_vs_gaussian", "N(0, t + bw^2) closed form",
                 "mollified-density norm over the exact Gaussian value at the largest h", 0.05,
                 Comparison::within},
                {"ae_zero", "constant coefficients: Y^eps = X_t",
                 "largest |ae| over the epsilon sweep", kExact, Comparison::at_most}},
               run_bulk_bm});

  r.push_back({"bulk_holder_sigma", kAeHolder + "; " + kPeKernel,
               "Hoelder sigma, frozen auxiliary: Ae rate, Pe envelope over a sigma panel, telescoping",
               100000, 1.0, eps6, h6,
               {{"beta", 0.5, "Hoelder exponent of sigma", 0.0, 1.0},
                {"amplitude", 0.3, "amplitude of the lacunary series in sigma", 0.0, 1.0},
                {"m", 2, "difference order of the Pe probe", 1, 6, true},
                {"omega", 1.0, "frequency of the cosine probe", 0.0, 1e3},
                {"pre_steps", 16, "Euler steps on [0, t-eps]", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t]", 1, 1e7, true}},
               {{"ae_moment_slope", kAeHolder, "slope of log E|X_t - Y_t|^2 against log eps", 0.15,
                 Comparison::within},
                {"a0_from_rate", "a_max = beta",
                 "a0 = theta * rate - 1 from the fitted first-moment rate, theta = 2", 0.15,
                 Comparison::within},
                {"pe_envelope", kPeKernel,
                 "largest |pe| / (|phi| C (1 ^ h/sqrt(eps))^m) over all (h, eps) and the sigma panel",
                 kExact, Comparison::at_most},
                {"pe_h_slope", kPeKernel, "pooled slope of log |pe| against log h for h <= sqrt(eps)/4",
                 0.2, Comparison::within},
                {"telescoping", "ae + pe = E[Delta_h^m phi(X_t)]",
                 "largest relative gap between ae + pe and the direct estimate", kExact,
                 Comparison::at_most}},
               run_bulk_holder_sigma});

  r.push_back({"morereg_drift", "improved Ae rate eps^(1+beta/2) with the drift kept in the auxiliary",
               "C^beta drift with drift_frozen against frozen; C^(1+beta) drift with the Taylor auxiliary",
               100000, 1.0, eps6, {},
               {{"beta", 0.5, "Hoelder exponent of the drift", 0.0, 1.0},
                {"amplitude", 0.3, "drift amplitude (C^beta model)", 0.0, 1e3},
                {"taylor_amplitude", 0.5, "drift amplitude (C^(1+beta) model)", 0.0, 1e3},
                {"pre_steps", 16, "Euler steps on [0, t-eps]", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t]", 1, 1e7, true}},
               {{"drift_frozen_slope", "E|X_t - Y_t| ~ eps^(1+beta/2)",
                 "slope of log E|X_t - Y_t| against log eps, drift_frozen", 0.15, Comparison::within},
                {"drift_frozen_gain", "keeping the drift cannot lose order",
                 "drift_frozen slope minus frozen slope", 0.05, Comparison::at_least},
                {"taylor_slope", "E|X_t - Y_t| ~ eps^((3+beta)/2) for C^(1+beta) drift",
                 "slope of log E|X_t - Y_t| against log eps, Taylor auxiliary", 0.2,
                 Comparison::within}},
               run_morereg_drift});

  r.push_back({"hypoelliptic", "hypoelliptic kernel: eigenvalues of order eps and eps^3; a_max = beta/3",
               "two-block system: conditional covariance scaling, Monte Carlo covariance, Taylor auxiliary",
               100000, 1.0, eps6, {},
               {{"beta", 0.5, "Hoelder exponent of the first-block drift derivative", 0.0, 1.0},
                {"amplitude", 0.5, "first-block drift amplitude", 0.0, 1e3},
                {"cov_pre_steps", 128, "Euler steps on [0, t-eps], linear model", 1, 1e7, true},
                {"cov_window_steps", 128, "Euler steps on [t-eps, t], linear model", 1, 1e7, true},
                {"pre_steps", 16, "Euler steps on [0, t-eps], nonlinear model", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t], nonlinear model", 1, 1e7, true}},
               {{"eig_large_slope", "eigenvalue of order eps", "slope of the large eigenvalue", 0.05,
                 Comparison::within},
                {"eig_small_slope", "eigenvalue of order eps^3", "slope of the small eigenvalue",
                 0.05, Comparison::within},
                {"mc_covariance", "covariance of (B_eps, int B) closed form",
                 "largest relative error of the Monte Carlo covariance entries", 0.05,
                 Comparison::at_most},
                {"var_x2", "Var(int_0^t B) = t^3/3", "Monte Carlo Var(X2_t) over t^3/3", 0.05,
                 Comparison::within},
                {"hypo_taylor_slope", "second-block coupling error",
                 "slope of log E|X2_t - Y2_t| against log eps", 0.2, Comparison::within},
                {"a_max", "a_max = beta/3", "a0 from theta = 2/3 and rate (3+beta)/2", kExact,
                 Comparison::within}},
               run_hypoelliptic});

  r.push_back({"weighted_singular", "weighted Pe: E[Delta_h^m phi(X_t) |sigma^-1(X_t)|^-m]",
               "degenerate sigma = min(1,|x|)^beta with weight sigma^m: three-term split and envelope",
               100000, 1.0, eps6, h6,
               {{"beta", 0.5, "exponent of the degenerate sigma", 0.0, 1.0},
                {"x0", 1.0, "initial point", -1e3, 1e3},
                {"m", 2, "difference order and weight power", 1, 6, true},
                {"omega", 1.0, "frequency of the cosine probe", 0.0, 1e3},
                {"pre_steps", 16, "Euler steps on [0, t-eps]", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t]", 1, 1e7, true}},
               {{"telescoping", "weighted split: weight term + ae + pe",
                 "largest relative gap between the three terms and the direct estimate", kExact,
                 Comparison::at_most},
                {"pe_envelope", "sigma^m G(h/(sigma sqrt(eps))) <= C (1 ^ h/sqrt(eps))^m",
                 "largest weighted |pe| / (|phi| C (1 ^ h/sqrt(eps))^m)", kExact, Comparison::at_most},
                {"pe_h_slope", "weighted Pe ~ |h|^m", "pooled slope of log |pe| for h <= sqrt(eps)/4",
                 0.2, Comparison::within}},
               run_weighted_singular});

  r.push_back({"squared_bessel", "p_t(x) = (2 pi t x)^(-1/2) e^(-x/(2t)) lies in B^s_{1,inf} only for s <= 1/2",
               "analytic density of B_t^2: bounded ratio below 1/2, growing ratio above, Monte Carlo law check",
               100000, 1.0, {}, dyadic(0, 10),
               {{"grid_spacing", 0x1p-14, "analytic density grid spacing", 0.0, 1.0},
                {"grid_left", 2.0, "grid starts at -grid_left * t", 0.0, 1e3},
                {"grid_right", 48.0, "grid ends at grid_right * t", 1.0, 1e4},
                {"s_bounded", 0.45, "index below the threshold", 0.0, 0.5},
                {"s_divergent", 0.6, "index above the threshold", 0.5, 2.0},
                {"spread_bound", 3.0, "allowed max/min of the bounded ratio", 1.0, 1e6},
                {"slope_points", 5, "smallest-h points in the slope fit", 3, 64, true},
                {"n_steps", 2048, "Euler steps for the Monte Carlo check", 1, 1e7, true}},
               {{"bounded_ratio_spread", "p_t in B^s_{1,inf} for s < 1/2",
                 "max/min over h of ||Delta_h^2 p_t||_1 / h^s_bounded", kExact, Comparison::at_most},
                {"divergent_ratio_growth", "p_t not in B^s_{1,inf} for s > 1/2",
                 "growth of ||Delta_h^2 p_t||_1 / h^s_divergent from the largest to the smallest h",
                 kExact, Comparison::at_least},
                {"divergent_ratio_monotone", "p_t not in B^s_{1,inf} for s > 1/2",
                 "number of non-increasing steps of the divergent ratio", kExact, Comparison::at_most},
                {"small_h_slope", "Besov index exactly 1/2", "slope over the smallest h", 0.05,
                 Comparison::within},
                {"mc_ks", "law of B_t^2", "KS distance of the Euler ensemble to erf(sqrt(x/2t))",
                 0.02, Comparison::at_most}},
               run_squared_bessel});

  r.push_back({"pathdep", "path-dependent sigma(t, omega) = f(running max): Ae ~ eps^(1+beta)",
               "running-maximum volatility: saturated exactness, Ae rate, Pe envelope",
               100000, 1.0, eps6, h6,
               {{"beta", 0.5, "Hoelder exponent of the profile", 0.0, 1.0},
                {"saturated_x0", 1.5, "start above 1 where the profile is flat", 1.0, 1e3},
                {"exact_paths", 10000, "paths for the saturated check", 64, 1e9, true},
                {"m", 2, "difference order of the Pe probe", 1, 6, true},
                {"omega", 1.0, "frequency of the cosine probe", 0.0, 1e3},
                {"pre_steps", 16, "Euler steps on [0, t-eps]", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t]", 1, 1e7, true}},
               {{"saturated_exact", "constant sigma: Y^eps = X_t", "largest |X_t - Y_t|", kExact,
                 Comparison::at_most},
                {"ae_moment_slope", "Ae ~ eps^(1+beta)", "slope of log E|X_t - Y_t|^2 (lower bound)",
                 0.15, Comparison::at_least},
                {"pe_envelope", kPeKernel, "largest |pe| / (|phi| C (1 ^ h/sqrt(eps))^m)", kExact,
                 Comparison::at_most}},
               run_pathdep});

  r.push_back({"levy_stable", "stable kernel: ||Delta_h g_t||_1 <~ (1 ^ t)^(-m/alpha) |h|^m; kappa window",
               "alpha-stable driver: kernel scaling in h and t, frozen coupling moments, Pe rate",
               100000, 1.0, eps6, h6,
               {{"alpha_stable", 1.5, "stable index, in (1, 2]", 1.0 + 1e-9, 2.0},
                {"beta", 0.5, "Hoelder exponent of sigma", 0.0, 1.0},
                {"amplitude", 0.3, "amplitude of the lacunary series in sigma", 0.0, 1.0},
                {"kernel_paths", 1000000, "stable draws per kernel time level", 1000, 1e9, true},
                {"t_levels", 5, "kernel time levels t 2^-k", 3, 20, true},
                {"kernel_h_kmin", 5, "largest kernel displacement 2^-k", 0, 30, true},
                {"kernel_h_kmax", 10, "smallest kernel displacement 2^-k", 0, 30, true},
                {"bandwidth_factor", 0.1, "kernel bandwidth over t^(1/alpha)", 0.0, 10.0},
                {"grid_spacing", 0x1p-10, "kernel grid spacing", 0.0, 1.0},
                {"box_halfwidth", 32.0, "kernel grid half-width", 1.0, 1e4},
                {"moment_power", 0.5, "coupling moment order, below alpha", 0.0, 2.0},
                {"kink_alpha", 0.5, "Hoelder exponent of the kink probe", 0.0, 1.0},
                {"kink_center", 2.5, "kink location (off-centre, where the density slopes)", -1e3, 1e3},
                {"p", 10.0, "spatial integrability for the kappa window", 1.0, 1e9},
                {"q", 20.0, "time integrability for the kappa window", 1.0, 1e9},
                {"pre_steps", 16, "Euler steps on [0, t-eps]", 1, 1e7, true},
                {"window_steps", 32, "Euler steps on [t-eps, t]", 1, 1e7, true}},
               {{"kernel_h_slope", "||Delta_h g_t||_1 ~ |h|^m", "slope in h at the first time level",
                 0.1, Comparison::within},
                {"kernel_t_slope", "||Delta_h g_t||_1 ~ t^(-m/alpha)", "slope in t at the smallest h",
                 0.1, Comparison::within},
                {"ae_moment_slope", "E|X_t - Y_t|^r ~ eps^(r(1+beta)/alpha) with b = 0",
                 "slope of log E|X_t - Y_t|^r against log eps", 0.1, Comparison::within},
                {"pe_h_slope", "frozen stable kernel: Pe ~ |h|^m",
                 "pooled slope of log |pe| for h <= eps^(1/alpha)/4", 0.2, Comparison::within},
                {"kappa", "kappa = 1/q' for constant sigma",
                 "kappa returned by the feasibility routine", kExact, Comparison::within},
                {"window_low", "admissible e above kappa d / (p (alpha kappa - 1) - d)",
                 "lower end of the admissible window", kExact, Comparison::within}},
               run_levy_stable});

  r.push_back({"rough_drift", "drift in L^q(L^p): density Besov norm blows up at most like t^(-e_gamma)",
               "truncated singular drift: time-singularity trend of the density seminorm (consistency, not proof; "
               "Euler convergence for such drifts is not covered by the theory)",
               100000, 1.0, {}, {},
               {{"gamma_sing", 0.25, "drift singularity |x-c|^-gamma_sing", 0.0, 1.0},
                {"truncation", 100.0, "drift truncation level M", 1.0, 1e9},
                {"center", 0.0, "singularity location c", -1e3, 1e3},
                {"x0", 0.0, "initial point", -1e3, 1e3},
                {"p", 3.5, "declared L^p membership, p < 1/gamma_sing", 1.0, 1e9},
                {"besov_index", 0.5, "Besov index gamma of the density seminorm", 0.0, 1.0},
                {"t_levels", 6, "time levels t 2^-k", 3, 20, true},
                {"n_steps", 256, "Euler steps per path", 1, 1e7, true},
                {"bandwidth_factor", 0.05, "density bandwidth over sqrt(t)", 0.0, 10.0},
                {"grid_spacing", 0x1p-10, "density grid spacing", 0.0, 1.0},
                {"box_halfwidth", 8.0, "density box half-width", 1.0, 1e4}},
               {{"membership", "2/q + d/p < 1", "d/p with q = infinity", kExact, Comparison::at_most},
                {"exponent_arithmetic", "e_gamma = (1 - 1/q)/(1 - 2/q - d/p) gamma",
                 "exponent routine against gamma p/(p-1)", kExact, Comparison::within},
                {"time_singularity", "||p_t||_{B^gamma_{1,inf}} <~ t^(-e_gamma)",
                 "minus the fitted t-slope of the density seminorm (consistency only)", kExact,
                 Comparison::at_most}},
               run_rough_drift});
  return r;
}

const std::vector<ScenarioDef>& registry() {
  static const std::vector<ScenarioDef> r = build_registry();
  return r;
}

const ScenarioDef& find(const std::string& name) {
  for (const auto& d : registry())
    if (d.name == name) return d;
  throw UsageError("unknown scenario '" + name + "'");
}

template <class E>
[[noreturn]] void rethrow_as(const E& e, const std::string& name) {
  throw E("scenario " + name + ": " + e.what());
}

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const auto& d : registry()) out.push_back({d.name, d.anchor, d.description});
  return out;
}

std::vector<KeyDoc> scenario_keys(const std::string& name) {
  const auto& d = find(name);
  std::vector<KeyDoc> out = {
      {"seed", "20240917", "master seed"},
      {"stream_id", "0", "base stream id"},
      {"n_paths", std::to_string(d.n_paths), "paths per sweep point"},
      {"t", fmt(d.t), "terminal time"},
      {"workers", "1", "worker threads (never changes results)"},
      {"output_dir", "", "artifact directory"},
  };
  if (!d.epsilon_sweep.empty())
    out.push_back({"epsilon_sweep", fmt_list(d.epsilon_sweep), "auxiliary windows t 2^-k (scaled by t)"});
  if (!d.h_sweep.empty()) out.push_back({"h_sweep", fmt_list(d.h_sweep), "displacements 2^-k"});
  for (const auto& p : d.params) out.push_back({p.key, fmt(p.value), p.doc});
  for (const auto& c : d.checks) out.push_back({"tol." + c.id, fmt(c.tolerance), c.doc});
  return out;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  const auto& def = find(config.name);
  const Context ctx(def, config);  // validation happens before any simulation
  ScenarioReport report;
  report.name = def.name;
  report.anchor = def.anchor;
  report.description = def.description;
  report.config_echo = ctx.echo();
  const auto start = std::chrono::steady_clock::now();
  try {
    def.run(ctx, report);
  } catch (const ParameterError& e) { rethrow_as(e, def.name);
  } catch (const SimulationError& e) { rethrow_as(e, def.name);
  } catch (const StateError& e) { rethrow_as(e, def.name);
  } catch (const EstimationError& e) { rethrow_as(e, def.name);
  } catch (const InsufficientDataError& e) { rethrow_as(e, def.name);
  } catch (const InfeasibleError& e) { rethrow_as(e, def.name);
  } catch (const IoError& e) { rethrow_as(e, def.name);
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!config.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create " + config.output_dir + ": " + ec.message());
    const auto base = std::filesystem::path(config.output_dir) / def.name;
    emit_report(report, ReportFormat::json, base.string() + ".json");
    emit_report(report, ReportFormat::csv, base.string() + ".csv");
    for (const auto& s : report.sweeps) {
      const auto path = base.string() + "_" + s.name + ".csv";
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IoError("cannot open " + path + " for writing");
      f << sweep_csv(s.points);
    }
  }
  return report;
}

}  // namespace besovlab
