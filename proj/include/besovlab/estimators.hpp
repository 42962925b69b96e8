#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "besovlab/auxiliary.hpp"
#include "besovlab/besov.hpp"
#include "besovlab/matrix.hpp"
#include "json.hpp"

namespace besovlab {

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

nlohmann::ordered_json to_json(const EstimateWithError& e);

inline constexpr std::size_t kDefaultBatches = 32;

/// Sample mean with a batch-means standard error over `batches` contiguous
/// batches (at least 16). The mean is a pairwise sum, so it depends only on
/// the order of `samples`.
EstimateWithError batch_means(std::span<const double> samples,
                              std::size_t batches = kDefaultBatches);

/// Weight w(x) multiplying the difference functional. An empty handle is the
/// unit weight.
using WeightFn = std::function<double(std::span<const double>)>;

/// Smooth cutoff equal to 1 on |x| <= R and 0 on |x| >= R + 1.
WeightFn eta_cutoff(double radius);

/// Mean of (Delta_h^m phi)(X) w(X) over the rows of `endpoints`.
EstimateWithError mc_weighted_difference(const Matrix& endpoints, const DifferenceProbe& probe,
                                         std::span<const double> h, const WeightFn& weight = {},
                                         std::size_t workers = 1);

/// Ae and Pe for the coupled pair. With a weight w the functional
/// E[w(X_t) Delta phi(X_t)] splits into three terms evaluated pathwise:
///   weight_term = E[Delta phi(X_t) (w(X_t) - w(X_{t-eps}))]
///   ae          = E[w(X_{t-eps}) (Delta phi(X_t) - Delta phi(Y_t))]
///   pe          = E[w(X_{t-eps}) Delta phi(Y_t)]
/// Without a weight, weight_term is absent and ae + pe is the plain functional.
struct AePeSplit {
  EstimateWithError ae;
  EstimateWithError pe;
  std::optional<EstimateWithError> weight_term;
};

AePeSplit ae_pe_split(const CoupledEnsemble& coupled, const DifferenceProbe& probe,
                      std::span<const double> h, const WeightFn& weight = {},
                      std::size_t workers = 1);

/// E|X_t - Y_t|^r for each requested power r.
std::vector<EstimateWithError> coupling_error_moments(const CoupledEnsemble& coupled,
                                                      std::span<const double> powers,
                                                      std::size_t workers = 1);

struct ScalePoint {
  double scale = 0.0;
  EstimateWithError estimate;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// 95% half-width of the slope.
  double ci_halfwidth = 0.0;
  std::size_t n_points = 0;
  double residual_rms = 0.0;
  /// Points that survived the noise-floor filter.
  std::vector<ScalePoint> points;
};

/// Weighted least squares of log(value) on log(scale). Points with
/// value <= 3 stderr are dropped first. Weights are 1/(stderr/value)^2 when
/// standard errors are available; the slope variance is the propagated one,
/// inflated by the reduced chi-square when that exceeds 1, and the interval
/// uses the Student t quantile with n - 2 degrees of freedom.
ScalingFit fit_scaling(std::span<const ScalePoint> pairs);

nlohmann::ordered_json to_json(const ScalingFit& fit);
/// Sweep CSV: scale,value,stderr.
std::string sweep_csv(std::span<const ScalePoint> pairs);

/// Inputs of the balancing argument between Ae <~ eps^{alpha(1+a0)/theta}
/// and Pe <~ (|h| / eps^{1/theta})^m.
struct ExponentParams {
  double alpha = 0.5;
  int m = 2;
  double theta = 2.0;
  double a0 = 0.5;
  double K0 = 1.0;
  double delta = 0.0;
  std::optional<double> beta;

  void validate() const;
};

/// delta_1 = 2 theta a0 delta / (2 + a0), delta_2 = delta_1 / (2 alpha (1 + a0)).
double schedule_delta2(const ExponentParams& params);

/// eps = |h|^{theta(1 - delta_2)} / 2 when that power is below t, else t / 2.
double epsilon_schedule(double h_norm, double t, const ExponentParams& params);

struct RegularityPrediction {
  /// Exponent s in E[Delta_h^m phi(X_t)] <~ |h|^s.
  double h_exponent = 0.0;
  /// Supremum (not attained) of admissible density regularity a.
  double a_max = 0.0;
  /// ||p_t||_{B^a_{1,inf}} <~ K0^{k0_exponent} (1 ^ t)^{-time_exponent}.
  double time_exponent = 0.0;
  double k0_exponent = 0.0;
  /// (1 ^ t)^{-time_exponent} K0^{k0_exponent} at the requested t.
  double bound_factor = 0.0;
};

RegularityPrediction predicted_regularity(const ExponentParams& params, double a, double t);

/// a0 for which a pathwise rate E|X_t - Y_t| <~ eps^r gives
/// Ae <~ eps^{alpha(1+a0)/theta}: a0 = theta r - 1.
double a0_from_ae_rate(double theta, double rate);

/// Lower bound (1 - 1/q) / (1 - 2/q - d/p) gamma for the time-singularity
/// exponent of the rough-drift estimate. q may be infinite.
double rough_drift_exponent(double p, double q, std::size_t d, double gamma);

struct LevyFeasibility {
  /// kappa at the lower end of the window (at e -> 0 when infeasible).
  double kappa = 0.0;
  double e_low = 0.0;
  double e_high = 0.0;
  bool feasible = false;
  /// True when kappa = 1/q' on the whole range and the window is closed form.
  bool closed_form = false;
};

/// kappa(e) = min(1/q', (1+beta)/alpha, 1/alpha + beta/q' - beta e / 2) and the
/// window of e with e q' < 1, alpha kappa > 1, d/p < alpha kappa - 1 and
/// e > kappa d / (p(alpha kappa - 1) - d). `constant_sigma` takes kappa = 1/q'.
/// When kappa is constant over (0, 1/q') the window is returned in closed form
/// unless `force_scan` is set; otherwise it is located by scanning e and
/// bisecting the end points.
LevyFeasibility levy_feasibility(double alpha_stable, double beta, double p, double q,
                                 std::size_t d, bool constant_sigma = false,
                                 bool force_scan = false);

/// Test functions with certified C^alpha_b bounds:
///   cosine  cos(<omega, x>)                        bound 1 + 2^{1-alpha} |omega|^alpha
///   kink    min(1, |x - c|^alpha)                  bound 2
///   bump    exp(1 - 1/(1 - |x-c|^2/r^2)) inside r  bound 1 + (L/r)^alpha, L = max|psi'|
struct TestFunctionParams {
  std::vector<double> omega{1.0};
  std::vector<double> center{0.0};
  double radius = 1.0;
};

/// Probe with m = 1 and an empty h_set; callers set both.
DifferenceProbe make_test_function(const std::string& family, double alpha,
                                   const TestFunctionParams& params = {});

}  // namespace besovlab
