#include <cmath>
#include <numbers>
#include <random>

#include "besovlab/auxiliary.hpp"
#include "besovlab/coefficients.hpp"
#include "besovlab/drivers.hpp"
#include "besovlab/error.hpp"
#include "besovlab/estimators.hpp"
#include "doctest.h"

using namespace besovlab;

namespace {

Matrix normal_samples(std::size_t n, std::uint64_t seed) {
  Stream s({seed, 0});
  Matrix m(n, 1);
  for (std::size_t i = 0; i < n; ++i) m(i, 0) = s.normal();
  return m;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("batch means: exact mean, at least 16 batches") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 7);
  const auto e = batch_means(v);
  double s = 0;
  for (double x : v) s += x;
  CHECK(e.value == doctest::Approx(s / 1000));
  CHECK(e.n == 1000);
  CHECK_THROWS_AS(batch_means(v, 8), ParameterError);
  CHECK_THROWS_AS(batch_means(std::vector<double>(10, 1.0)), InsufficientDataError);
  const auto zero = batch_means(std::vector<double>(64, 2.5));
  CHECK(zero.value == 2.5);
  CHECK(zero.std_error == 0.0);
}

TEST_CASE("batch-means error matches the i.i.d. standard error") {
  const auto x = normal_samples(400000, 2);
  std::vector<double> v(x.data().begin(), x.data().end());
  const auto e = batch_means(v);
  CHECK(std::abs(e.std_error / std::sqrt(1.0 / 400000.0) - 1.0) < 0.35);
}

TEST_CASE("weighted difference: constants vanish and the Gaussian oracle holds") {
  const auto x = normal_samples(200000, 4);
  auto probe = make_test_function("cosine", 0.5);
  probe.m = 1;
  DifferenceProbe flat = probe;
  flat.phi = [](auto) { return 1.3; };
  const double h[] = {0.4};
  const auto c = mc_weighted_difference(x, flat, h, eta_cutoff(1.0));
  CHECK(c.value == 0.0);
  CHECK(c.std_error == 0.0);
  // E cos(X + h) - E cos X = e^{-1/2} (cos h - 1)
  const auto e = mc_weighted_difference(x, probe, h);
  const double exact = std::exp(-0.5) * (std::cos(0.4) - 1.0);
  CHECK(std::abs(e.value - exact) < 4.0 * e.std_error);
  // a cutoff beyond the sample range changes nothing
  const auto w = mc_weighted_difference(x, probe, h, eta_cutoff(100.0));
  CHECK(w.value == e.value);
  CHECK(w.std_error == e.std_error);
}

TEST_CASE("weighted difference: preconditions and non-finite values") {
  const auto x = normal_samples(64, 1);
  auto probe = make_test_function("kink", 0.5);
  const double big[] = {1.5};
  CHECK_THROWS_AS(mc_weighted_difference(x, probe, big), ParameterError);
  probe.m = 0;
  const double h[] = {0.1};
  CHECK_THROWS_AS(mc_weighted_difference(x, probe, h), ParameterError);
  probe.m = 1;
  const WeightFn nan_weight = [](auto) { return std::nan(""); };
  CHECK_THROWS_AS(mc_weighted_difference(x, probe, h, nan_weight), EstimationError);
  const double h2[] = {0.1, 0.1};
  CHECK_THROWS_AS(mc_weighted_difference(x, probe, h2), ParameterError);
}

TEST_CASE("stderr halves when the sample size quadruples") {
  auto probe = make_test_function("cosine", 0.5);
  probe.m = 2;
  const double h[] = {0.25};
  double ratio_sum = 0.0;
  const int panels = 4;
  for (int s = 0; s < panels; ++s) {
    const auto small = mc_weighted_difference(normal_samples(50000, 10 + s), probe, h);
    const auto large = mc_weighted_difference(normal_samples(200000, 10 + s), probe, h);
    ratio_sum += large.std_error / small.std_error;
  }
  CHECK(std::abs(ratio_sum / panels - 0.5) < 0.1);
}

TEST_CASE("Ae/Pe split: exact coupling, telescoping, weighted three-term form") {
  const auto model = constant_model(0.0, 1.0);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.25, 64, 4096, {3, 0});
  const auto coupled = build_coupled(ens, model, {AuxTag::frozen, {}});
  auto probe = make_test_function("cosine", 0.5, {{3.0}, {0.0}, 1.0});
  probe.m = 2;
  const double h[] = {0.125};
  const auto split = ae_pe_split(coupled, probe, h);
  CHECK(split.ae.value == 0.0);
  CHECK(split.ae.std_error == 0.0);

  const auto hmodel = holder_sigma_model(0.5);
  const auto hens = simulate_with_checkpoint(hmodel, 1.0, 0.125, 64, 4096, {4, 0});
  const auto hc = build_coupled(hens, hmodel, {AuxTag::frozen, {}});
  const auto s2 = ae_pe_split(hc, probe, h);
  const auto direct = mc_weighted_difference(hc.x_end, probe, h);
  CHECK(close_rel(s2.ae.value + s2.pe.value, direct.value, 1e-12));

  const auto w = inverse_sigma_weight(hmodel.coefficients, 2);
  const auto s3 = ae_pe_split(hc, probe, h, w);
  REQUIRE(s3.weight_term.has_value());
  const auto wdirect = mc_weighted_difference(hc.x_end, probe, h, w);
  CHECK(close_rel(s3.weight_term->value + s3.ae.value + s3.pe.value, wdirect.value, 1e-12));
}

TEST_CASE("coupling moments: exact zero and the stable moment restriction") {
  const auto model = constant_model(0.0, 1.0);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.25, 32, 64, {3, 0});
  const auto c = build_coupled(ens, model, {AuxTag::frozen, {}});
  const double powers[] = {0.5, 1.0, 2.0};
  for (const auto& e : coupling_error_moments(c, powers)) CHECK(e.value == 0.0);
  const auto smodel = stable_model(1.5, 0.5);
  const auto sens = simulate_with_checkpoint(smodel, 1.0, 0.25, 32, 64, {3, 0});
  const auto sc = build_coupled(sens, smodel, {AuxTag::levy_frozen, {}});
  const double ok[] = {0.5, 1.2};
  CHECK_NOTHROW(coupling_error_moments(sc, ok));
  const double bad[] = {1.5};
  CHECK_THROWS_AS(coupling_error_moments(sc, bad), ParameterError);
  const double neg[] = {-1.0};
  CHECK_THROWS_AS(coupling_error_moments(c, neg), ParameterError);
}

TEST_CASE("scaling fit: exact power law") {
  std::vector<ScalePoint> pts;
  for (int k = 1; k <= 6; ++k) {
    const double s = std::exp2(-k);
    pts.push_back({s, {7.0 * std::pow(s, 1.5), 0.0, 100}});
  }
  const auto fit = fit_scaling(pts);
  CHECK(fit.slope == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(fit.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(fit.residual_rms < 1e-12);
  CHECK(fit.n_points == 6);
  const auto j = to_json(fit);
  CHECK(j.contains("slope"));
  CHECK(j.contains("ci"));
  CHECK(j["points"].size() == 6);
  CHECK(sweep_csv(pts).rfind("scale,value,stderr\n", 0) == 0);
}

TEST_CASE("scaling fit: noise floor and insufficient data") {
  std::vector<ScalePoint> two{{0.5, {1.0, 0.01, 10}}, {0.25, {0.5, 0.01, 10}}};
  CHECK_THROWS_AS(fit_scaling(two), InsufficientDataError);
  std::vector<ScalePoint> noisy{{0.5, {1.0, 0.01, 10}}, {0.25, {0.5, 0.01, 10}},
                                {0.125, {0.02, 0.01, 10}}, {0.0625, {-0.01, 0.01, 10}}};
  CHECK_THROWS_AS(fit_scaling(noisy), InsufficientDataError);
  noisy.push_back({0.03125, {0.1, 0.001, 10}});
  CHECK(fit_scaling(noisy).n_points == 3);
}

TEST_CASE("scaling fit: 95% interval covers the truth in at least 90 of 100 trials") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.01);
  int covered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScalePoint> pts;
    for (int k = 1; k <= 6; ++k) {
      const double s = std::exp2(-k);
      const double v = 3.0 * std::pow(s, 1.25) * (1.0 + noise(rng));
      pts.push_back({s, {v, 0.01 * v, 1000}});
    }
    const auto fit = fit_scaling(pts);
    if (std::abs(fit.slope - 1.25) <= fit.ci_halfwidth) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("epsilon schedule") {
  ExponentParams p;
  p.theta = 2.0;
  p.a0 = 0.5;
  p.delta = 0.0;
  CHECK(epsilon_schedule(0.1, 1.0, p) == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(epsilon_schedule(0.1, 1e-6, p) == 0.5e-6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ExponentParams q;
    q.alpha = 0.01 + 0.98 * u(rng);
    q.m = 1 + static_cast<int>(4 * u(rng));
    q.theta = 0.2 + 3 * u(rng);
    q.a0 = 0.01 + 2 * u(rng);
    q.delta = 0.1 * u(rng);
    const double h = std::max(1e-9, u(rng));
    const double t = std::exp(-10 * u(rng) + 3);
    if (schedule_delta2(q) >= 1.0) {
      CHECK_THROWS_AS(epsilon_schedule(h, t, q), ParameterError);
      continue;
    }
    const double e = epsilon_schedule(h, t, q);
    CHECK(e <= t / 2);
    CHECK(e < 1.0);
    CHECK(e > 0.0);
  }
  p.a0 = 0.0;
  CHECK_THROWS_AS(epsilon_schedule(0.1, 1.0, p), ParameterError);
}

TEST_CASE("predicted regularity") {
  ExponentParams p;
  p.alpha = 0.5;
  p.m = 2;
  p.theta = 2.0;
  p.a0 = 0.5;
  const auto r = predicted_regularity(p, 0.25, 0.5);
  CHECK(r.a_max == 0.5);
  CHECK(r.h_exponent == doctest::Approx(0.5 * 2 * 1.5 / (2 + 0.75)).epsilon(1e-15));
  CHECK(r.time_exponent == doctest::Approx(1.5 / 1.0 * 0.25).epsilon(1e-15));
  CHECK(r.k0_exponent == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(predicted_regularity(p, 0.5, 1.0), ParameterError);
  // the h exponent tends to 1 + a0 as alpha -> 1 and m -> infinity
  p.alpha = 1.0 - 1e-12;
  p.m = 100000000;
  CHECK(predicted_regularity(p, 0.1, 1.0).h_exponent == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("rough drift and Levy feasibility arithmetic") {
  CHECK(rough_drift_exponent(2, 8, 1, 0.1) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(rough_drift_exponent(2, 8, 1, 0.0) == 0.0);
  CHECK_THROWS_AS(rough_drift_exponent(2, 2, 1, 0.1), InfeasibleError);
  CHECK(rough_drift_exponent(4, kInfinity, 1, 0.2) == doctest::Approx(0.2 / 0.75));

  const auto lf = levy_feasibility(1.5, 0.5, 10, 20, 1, true);
  CHECK(lf.feasible);
  CHECK(lf.kappa == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(lf.e_low == doctest::Approx(0.95 / 3.25).epsilon(1e-14));
  CHECK(lf.e_high == doctest::Approx(0.95).epsilon(1e-15));

  const auto bad = levy_feasibility(1.01, 0.01, 2, 2, 3);
  CHECK_FALSE(bad.feasible);
  CHECK_THROWS_AS(levy_feasibility(1.0, 0.5, 10, 20, 1), ParameterError);
}

TEST_CASE("Levy window: scan agrees with the closed form when kappa is constant") {
  // beta large enough that kappa = 1/q' over the whole range
  for (auto [alpha, beta, p, q] : {std::tuple{1.5, 0.9, 10.0, 20.0}, std::tuple{1.8, 0.8, 8.0, 10.0},
                                   std::tuple{1.9, 0.95, 20.0, 40.0}}) {
    const auto fast = levy_feasibility(alpha, beta, p, q, 1);
    REQUIRE(fast.closed_form);
    const auto scan = levy_feasibility(alpha, beta, p, q, 1, false, true);
    CHECK(fast.feasible == scan.feasible);
    CHECK(scan.e_low == doctest::Approx(fast.e_low).epsilon(1e-12));
    CHECK(scan.e_high == doctest::Approx(fast.e_high).epsilon(1e-12));
  }
}

TEST_CASE("Levy window with e-dependent kappa is admissible inside and not outside") {
  const double alpha = 1.6, beta = 0.1, p = 100, q = 5;
  const auto lf = levy_feasibility(alpha, beta, p, q, 1);
  REQUIRE_FALSE(lf.closed_form);
  REQUIRE(lf.feasible);
  const double inv_qp = 1 - 1 / q;
  auto kappa = [&](double e) { return std::min({inv_qp, (1 + beta) / alpha, 1 / alpha + beta * inv_qp - beta * e / 2}); };
  auto ok = [&](double e) {
    const double k = kappa(e), ak = alpha * k;
    return e < inv_qp && ak > 1 && 1 / p < ak - 1 && e > k / (p * (ak - 1) - 1);
  };
  const double mid = 0.5 * (lf.e_low + lf.e_high);
  CHECK(ok(mid));
  CHECK(ok(lf.e_low + 1e-9));
  CHECK_FALSE(ok(lf.e_low - 1e-9));
  CHECK(lf.kappa == doctest::Approx(kappa(lf.e_low)));
}

TEST_CASE("test functions: certified bounds") {
  const auto kink = make_test_function("kink", 0.4, {{1.0}, {0.3}, 1.0});
  for (double h : {1e-4, 1e-2, 0.5}) {
    const std::vector<double> c{0.3}, ch{0.3 + h};
    CHECK(std::abs(kink.phi(ch) - kink.phi(c)) == doctest::Approx(std::pow(h, 0.4)).epsilon(1e-12));
  }
  const auto cosine = make_test_function("cosine", 0.4, {{2.0, -1.0}, {0.0}, 1.0});
  CHECK(cosine.phi(std::vector<double>{0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(make_test_function("wavelet", 0.4), ParameterError);
  CHECK_THROWS_AS(make_test_function("kink", 1.0), ParameterError);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& [name, params] :
       {std::pair{std::string("cosine"), TestFunctionParams{{3.0}, {0.0}, 1.0}},
        std::pair{std::string("kink"), TestFunctionParams{{1.0}, {0.2}, 1.0}},
        std::pair{std::string("bump"), TestFunctionParams{{1.0}, {0.0}, 0.5}}}) {
    for (double alpha : {0.2, 0.5, 0.9}) {
      const auto f = make_test_function(name, alpha, params);
      double sup = 0.0, worst = 0.0;
      for (int i = 0; i < 100000; ++i) {
        const std::vector<double> x{2.0 * u(rng)};
        const double h = std::pow(10.0, -4.0 * std::abs(u(rng))) * (u(rng) < 0 ? -1 : 1);
        const std::vector<double> xh{x[0] + h};
        sup = std::max(sup, std::abs(f.phi(x)));
        worst = std::max(worst, std::abs(f.phi(xh) - f.phi(x)) / std::pow(std::abs(h), alpha));
      }
      CHECK(sup + worst <= f.phi_norm_bound);
    }
  }
}
