#include "besovlab/estimators.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <sstream>
#include <iomanip>

#include "besovlab/error.hpp"
#include "besovlab/parallel.hpp"

namespace besovlab {

nlohmann::ordered_json to_json(const EstimateWithError& e) {
  nlohmann::ordered_json j;
  j["value"] = e.value;
  j["stderr"] = e.std_error;
  j["n"] = e.n;
  return j;
}

EstimateWithError batch_means(std::span<const double> samples, std::size_t batches) {
  if (batches < 16) throw ParameterError("batch means needs at least 16 batches");
  const std::size_t n = samples.size();
  if (n < batches) throw InsufficientDataError("fewer samples than batches");
  EstimateWithError out;
  out.n = n;
  out.value = pairwise_sum(samples) / static_cast<double>(n);
  std::vector<double> dev(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * n / batches;
    const std::size_t hi = (b + 1) * n / batches;
    const double share = static_cast<double>(hi - lo) / static_cast<double>(n);
    const double mean = pairwise_sum(samples.subspan(lo, hi - lo)) / static_cast<double>(hi - lo);
    const double r = share * (mean - out.value);
    dev[b] = r * r;
  }
  const double bd = static_cast<double>(batches);
  out.std_error = std::sqrt(pairwise_sum(dev) * bd / (bd - 1.0));
  return out;
}

WeightFn eta_cutoff(double radius) {
  if (!(radius > 0.0)) throw ParameterError("cutoff radius must be positive");
  return [radius](std::span<const double> x) {
    const double s = norm(x) - radius;
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - s));
    const double b = std::exp(-1.0 / s);
    return a / (a + b);
  };
}

namespace {

std::vector<double> difference_weights(int m) {
  std::vector<double> c(m + 1);
  for (int j = 0; j <= m; ++j) c[j] = ((m - j) % 2 ? -1.0 : 1.0) * binomial(m, j);
  return c;
}

// (Delta_h^m phi)(x); scratch has the dimension of x
double apply_difference(const DifferenceProbe& probe, std::span<const double> coef,
                        std::span<const double> h, std::span<const double> x,
                        std::vector<double>& scratch) {
  double acc = 0.0;
  for (int j = 0; j <= probe.m; ++j) {
    for (std::size_t a = 0; a < x.size(); ++a) scratch[a] = x[a] + j * h[a];
    acc += coef[j] * probe.phi(scratch);
  }
  return acc;
}

void check_probe_h(const DifferenceProbe& probe, std::span<const double> h, std::size_t dim) {
  probe.validate();
  if (h.size() != dim) throw ParameterError("displacement dimension does not match the samples");
  if (norm(h) > 1.0) throw ParameterError("displacement must satisfy |h| <= 1");
}

double finite_or_throw(double v, const char* what, std::size_t row) {
  if (!std::isfinite(v))
    throw EstimationError(std::string("non-finite ") + what + " at sample " + std::to_string(row));
  return v;
}

}  // namespace

EstimateWithError mc_weighted_difference(const Matrix& endpoints, const DifferenceProbe& probe,
                                         std::span<const double> h, const WeightFn& weight,
                                         std::size_t workers) {
  check_probe_h(probe, h, endpoints.cols());
  const auto coef = difference_weights(probe.m);
  std::vector<double> values(endpoints.rows());
  parallel_chunks(endpoints.rows(), workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch(endpoints.cols());
    for (std::size_t i = lo; i < hi; ++i) {
      const auto x = endpoints.row(i);
      double v = finite_or_throw(apply_difference(probe, coef, h, x, scratch), "test function", i);
      if (weight) v *= finite_or_throw(weight(x), "weight", i);
      values[i] = v;
    }
  });
  return batch_means(values);
}

AePeSplit ae_pe_split(const CoupledEnsemble& coupled, const DifferenceProbe& probe,
                      std::span<const double> h, const WeightFn& weight, std::size_t workers) {
  const std::size_t n = coupled.size();
  if (n == 0 || coupled.y_end.rows() != n || coupled.y_end.cols() != coupled.x_end.cols())
    throw StateError("coupled ensemble is empty or inconsistent");
  if (weight && coupled.checkpoint.rows() != n)
    throw StateError("weighted split needs the checkpoint states");
  check_probe_h(probe, h, coupled.x_end.cols());
  const auto coef = difference_weights(probe.m);
  std::vector<double> ae(n), pe(n), wt(weight ? n : 0);
  parallel_chunks(n, workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> scratch(coupled.x_end.cols());
    for (std::size_t i = lo; i < hi; ++i) {
      const double dx =
          finite_or_throw(apply_difference(probe, coef, h, coupled.x_end.row(i), scratch), "test function", i);
      const double dy =
          finite_or_throw(apply_difference(probe, coef, h, coupled.y_end.row(i), scratch), "test function", i);
      if (weight) {
        const double w_end = finite_or_throw(weight(coupled.x_end.row(i)), "weight", i);
        const double w_chk = finite_or_throw(weight(coupled.checkpoint.row(i)), "weight", i);
        wt[i] = dx * (w_end - w_chk);
        ae[i] = w_chk * (dx - dy);
        pe[i] = w_chk * dy;
      } else {
        ae[i] = dx - dy;
        pe[i] = dy;
      }
    }
  });
  AePeSplit out{batch_means(ae), batch_means(pe), std::nullopt};
  if (weight) out.weight_term = batch_means(wt);
  return out;
}

std::vector<EstimateWithError> coupling_error_moments(const CoupledEnsemble& coupled,
                                                      std::span<const double> powers,
                                                      std::size_t workers) {
  const std::size_t n = coupled.size();
  if (n == 0 || coupled.y_end.rows() != n) throw StateError("coupled ensemble is empty or inconsistent");
  for (double r : powers) {
    if (!(r > 0.0)) throw ParameterError("moment powers must be positive");
    if (coupled.stable_alpha && r >= *coupled.stable_alpha)
      throw ParameterError("moment of order " + std::to_string(r) +
                           " does not exist under a stable driver of index " +
                           std::to_string(*coupled.stable_alpha));
  }
  std::vector<double> dist(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto x = coupled.x_end.row(i);
    const auto y = coupled.y_end.row(i);
    double s = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) s += (x[a] - y[a]) * (x[a] - y[a]);
    dist[i] = std::sqrt(s);
  });
  std::vector<EstimateWithError> out;
  std::vector<double> vals(n);
  for (double r : powers) {
    for (std::size_t i = 0; i < n; ++i) vals[i] = r == 2.0 ? dist[i] * dist[i] : std::pow(dist[i], r);
    out.push_back(batch_means(vals));
  }
  return out;
}

ScalingFit fit_scaling(std::span<const ScalePoint> pairs) {
  ScalingFit fit;
  for (const auto& p : pairs) {
    if (!(p.scale > 0.0)) throw ParameterError("scales must be positive");
    const auto& e = p.estimate;
    if (std::isfinite(e.value) && e.value > 0.0 && e.value > 3.0 * e.std_error) fit.points.push_back(p);
  }
  const std::size_t n = fit.points.size();
  if (n < 3)
    throw InsufficientDataError("scaling fit needs at least 3 points above the noise floor, got " +
                                std::to_string(n));
  std::vector<double> x(n), y(n), rel(n), w(n);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(fit.points[i].scale);
    y[i] = std::log(fit.points[i].estimate.value);
    rel[i] = fit.points[i].estimate.std_error / fit.points[i].estimate.value;
    max_rel = std::max(max_rel, rel[i]);
  }
  const bool informative = max_rel > 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // zero-error points would otherwise take infinite weight
    const double s = informative ? std::max(rel[i], 1e-3 * max_rel) : 1.0;
    w[i] = 1.0 / (s * s);
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("scaling fit needs at least two distinct scales");
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double chi2 = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += w[i] * r * r;
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  fit.n_points = n;
  const double dof = static_cast<double>(n - 2);
  const double reduced = chi2 / dof;
  const double factor = informative ? std::max(1.0, reduced) : reduced;
  const double slope_se = std::sqrt(factor / sxx);
  const boost::math::students_t dist(dof);
  fit.ci_halfwidth = boost::math::quantile(boost::math::complement(dist, 0.025)) * slope_se;
  return fit;
}

nlohmann::ordered_json to_json(const ScalingFit& fit) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["ci"] = fit.ci_halfwidth;
  j["n_points"] = fit.n_points;
  j["residual_rms"] = fit.residual_rms;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : fit.points) {
    nlohmann::ordered_json e;
    e["scale"] = p.scale;
    e["value"] = p.estimate.value;
    e["stderr"] = p.estimate.std_error;
    e["n"] = p.estimate.n;
    pts.push_back(e);
  }
  j["points"] = pts;
  return j;
}

std::string sweep_csv(std::span<const ScalePoint> pairs) {
  std::ostringstream out;
  out << "scale,value,stderr\n" << std::setprecision(17);
  for (const auto& p : pairs) out << p.scale << ',' << p.estimate.value << ',' << p.estimate.std_error << '\n';
  return out.str();
}

void ExponentParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (m < 1) throw ParameterError("m must be >= 1");
  if (!(theta > 0.0)) throw ParameterError("theta must be positive");
  if (!(a0 > 0.0))
    throw ParameterError("a0 must be positive; the balancing argument needs an Ae rate beyond eps^{alpha/theta}");
  if (!(K0 >= 1.0)) throw ParameterError("K0 must be >= 1");
  if (!(delta >= 0.0)) throw ParameterError("delta must be nonnegative");
  if (beta && !(*beta > 0.0)) throw ParameterError("beta must be positive");
}

double schedule_delta2(const ExponentParams& params) {
  const double d1 = 2.0 * params.theta * params.a0 * params.delta / (2.0 + params.a0);
  return d1 / (2.0 * params.alpha * (1.0 + params.a0));
}

double epsilon_schedule(double h_norm, double t, const ExponentParams& params) {
  params.validate();
  if (!(h_norm > 0.0 && h_norm <= 1.0)) throw ParameterError("|h| must lie in (0, 1]");
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  const double d2 = schedule_delta2(params);
  if (!(d2 < 1.0)) throw ParameterError("delta too large: the schedule needs delta_2 < 1");
  const double power = std::pow(h_norm, params.theta * (1.0 - d2));
  return power < t ? 0.5 * power : 0.5 * t;
}

RegularityPrediction predicted_regularity(const ExponentParams& params, double a, double t) {
  params.validate();
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  if (!(a >= 0.0)) throw ParameterError("regularity a must be nonnegative");
  if (a >= params.a0) throw ParameterError("requested regularity a must be below a0");
  const double alpha = params.alpha, m = params.m, a0 = params.a0, th = params.theta;
  RegularityPrediction out;
  out.h_exponent = alpha * m * (1.0 + a0) / (m + alpha * (1.0 + a0));
  out.a_max = a0;
  out.time_exponent = (1.0 + a0) / (th * a0) * a + params.delta;
  out.k0_exponent = a / (th * a0) + params.delta;
  out.bound_factor = std::pow(params.K0, out.k0_exponent) * std::pow(std::min(1.0, t), -out.time_exponent);
  return out;
}

double a0_from_ae_rate(double theta, double rate) {
  if (!(theta > 0.0) || !(rate > 0.0)) throw ParameterError("theta and rate must be positive");
  return theta * rate - 1.0;
}

double rough_drift_exponent(double p, double q, std::size_t d, double gamma) {
  if (!(p > 1.0) || !(q > 1.0)) throw ParameterError("p and q must exceed 1");
  if (d == 0) throw ParameterError("dimension must be positive");
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be nonnegative");
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double gap = 1.0 - 2.0 * inv_q - static_cast<double>(d) / p;
  if (!(gap > 0.0)) throw InfeasibleError("rough drift estimate needs 2/q + d/p < 1");
  return (1.0 - inv_q) / gap * gamma;
}

namespace {

struct LevyInputs {
  double alpha, beta, p, inv_qp, d;
  bool constant_sigma;

  double kappa(double e) const {
    if (constant_sigma) return inv_qp;
    return std::min({inv_qp, (1.0 + beta) / alpha, 1.0 / alpha + beta * inv_qp - 0.5 * beta * e});
  }
  // every condition except e < 1/q', which the search range enforces
  bool admissible(double e) const {
    const double k = kappa(e);
    const double ak = alpha * k;
    if (!(ak > 1.0) || !(d / p < ak - 1.0)) return false;
    return e > k * d / (p * (ak - 1.0) - d);
  }
};

}  // namespace

LevyFeasibility levy_feasibility(double alpha_stable, double beta, double p, double q,
                                 std::size_t d, bool constant_sigma, bool force_scan) {
  if (!(alpha_stable > 1.0 && alpha_stable <= 2.0))
    throw ParameterError("the stable estimate needs alpha_stable in (1, 2]");
  if (!constant_sigma && !(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  if (!(p >= 1.0) || !(q > 1.0) || d == 0) throw ParameterError("need p >= 1, q > 1, d >= 1");
  const double inv_qp = std::isinf(q) ? 1.0 : 1.0 - 1.0 / q;
  const LevyInputs in{alpha_stable, beta, p, inv_qp, static_cast<double>(d), constant_sigma};

  LevyFeasibility out;
  // kappa is nonincreasing in e, so it is constant on (0, 1/q') iff it equals
  // 1/q' at the right end
  out.closed_form = in.kappa(inv_qp) == inv_qp;
  if (out.closed_form && !force_scan) {
    const double k = inv_qp;
    out.kappa = k;
    const double ak = alpha_stable * k;
    if (ak > 1.0 && in.d / p < ak - 1.0) {
      const double lo = k * in.d / (p * (ak - 1.0) - in.d);
      if (lo < inv_qp) {
        out.feasible = true;
        out.e_low = lo;
        out.e_high = inv_qp;
      }
    }
    return out;
  }

  // scan for the first admissible run, then bisect both ends
  constexpr int kScan = 4096;
  int first = -1, last = -1;
  for (int i = 1; i < kScan; ++i) {
    const double e = inv_qp * i / kScan;
    if (in.admissible(e)) {
      if (first < 0) first = i;
      last = i;
    } else if (first >= 0) {
      break;
    }
  }
  if (first < 0) {
    out.kappa = in.kappa(0.0);
    return out;
  }
  auto refine = [&](double bad, double good) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (bad + good);
      if (mid == bad || mid == good) break;
      (in.admissible(mid) ? good : bad) = mid;
    }
    return good;
  };
  const double lo_good = inv_qp * first / kScan;
  out.e_low = refine(inv_qp * (first - 1) / kScan, lo_good);
  const double hi_good = inv_qp * last / kScan;
  out.e_high = last == kScan - 1 && in.admissible(std::nextafter(inv_qp, 0.0))
                   ? inv_qp
                   : refine(inv_qp * (last + 1) / kScan, hi_good);
  out.kappa = in.kappa(out.e_low);
  out.feasible = true;
  return out;
}

DifferenceProbe make_test_function(const std::string& family, double alpha,
                                   const TestFunctionParams& params) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("test function alpha must lie in (0, 1)");
  DifferenceProbe probe;
  probe.alpha = alpha;
  if (family == "cosine") {
    const auto omega = params.omega;
    probe.phi = [omega](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) s += omega[a % omega.size()] * x[a];
      return std::cos(s);
    };
    probe.phi_norm_bound = 1.0 + std::pow(2.0, 1.0 - alpha) * std::pow(norm(omega), alpha);
  } else if (family == "kink") {
    const auto c = params.center;
    probe.phi = [c, alpha](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        const double r = x[a] - c[a % c.size()];
        s += r * r;
      }
      return std::min(1.0, std::pow(std::sqrt(s), alpha));
    };
    probe.phi_norm_bound = 2.0;
  } else if (family == "bump") {
    if (!(params.radius > 0.0)) throw ParameterError("bump radius must be positive");
    const auto c = params.center;
    const double r = params.radius;
    probe.phi = [c, r](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        const double z = (x[a] - c[a % c.size()]) / r;
        s += z * z;
      }
      return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s));
    };
    // psi(u) = exp(1 - 1/(1-u^2)); psi'(u) = -2u psi(u) / (1-u^2)^2, maximised on a fine grid
    double lip = 0.0;
    for (int i = 1; i < 20000; ++i) {
      const double u = i / 20000.0;
      const double q = 1.0 - u * u;
      lip = std::max(lip, 2.0 * u * std::exp(1.0 - 1.0 / q) / (q * q));
    }
    lip *= 1.001;  // grid maximum undershoots the true one slightly
    probe.phi_norm_bound = 1.0 + std::pow(lip / r, alpha);
  } else {
    throw ParameterError("unknown test function family '" + family + "'");
  }
  return probe;
}

}  // namespace besovlab
