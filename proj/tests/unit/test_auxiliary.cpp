#include <cmath>

#include "besovlab/auxiliary.hpp"
#include "besovlab/coefficients.hpp"
#include "besovlab/error.hpp"
#include "besovlab/linalg.hpp"
#include "doctest.h"

using namespace besovlab;

TEST_CASE("frozen auxiliary reproduces constant-coefficient paths exactly") {
  const auto model = constant_model(0.0, 1.7);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.25, 64, 200, {1, 0});
  const auto c = build_coupled(ens, model, {AuxTag::frozen, {}});
  CHECK(c.x_end == c.y_end);
  CHECK(c.checkpoint == *ens.checkpoints);
  CHECK_FALSE(c.stable_alpha.has_value());
}

TEST_CASE("drift_frozen reproduces constant drift exactly, frozen does not") {
  const auto model = constant_model(0.4, 1.0);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.25, 64, 50, {1, 0});
  CHECK(build_coupled(ens, model, {AuxTag::drift_frozen, {}}).y_end == ens.endpoints);
  CHECK_FALSE(build_coupled(ens, model, {AuxTag::frozen, {}}).y_end == ens.endpoints);
}

TEST_CASE("levy_frozen with constant sigma is exact") {
  const auto model = stable_model(1.5, 0.5, 0.0);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.125, 64, 100, {2, 0});
  const auto c = build_coupled(ens, model, {AuxTag::levy_frozen, {}});
  CHECK(c.y_end == c.x_end);
  REQUIRE(c.stable_alpha.has_value());
  CHECK(*c.stable_alpha == 1.5);
}

TEST_CASE("taylor auxiliary is exact for linear drift with zero slope and matches its variance") {
  // b(x) = lambda x, sigma = 1: Y = y + lambda y eps + lambda int W + W_eps
  const double lambda = -0.8;
  ModelSpec m = constant_model(0.0, 1.0, 0.3);
  m.coefficients.drift = [lambda](const PathView& p, std::span<double> out) {
    out[0] = lambda * p.current()[0];
  };
  const JacobianFn jac = [lambda](std::span<const double>, std::span<double> out) { out[0] = lambda; };
  const double eps = 0.5;
  const std::size_t n = 60000;
  const auto ens = simulate_with_checkpoint(m, 1.0, eps, 256, n, {3, 0}, {128, 1});
  const auto c = build_coupled(ens, m, {AuxTag::taylor, jac});
  double mu = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y0 = c.checkpoint(i, 0);
    const double r = c.y_end(i, 0) - y0 - lambda * y0 * eps;
    mu += r;
    s2 += r * r;
  }
  mu /= n;
  const double var = s2 / n - mu * mu;
  const double target = taylor_conditional_variance(eps, lambda);
  CHECK(std::abs(mu) < 4.0 * std::sqrt(target / n));
  // left-point sums carry an O(dt) bias in the cross term
  CHECK(std::abs(var / target - 1.0) < 0.03);
}

TEST_CASE("hypoelliptic closed-form covariance") {
  for (double e : {1.0, 0.25, 1e-2, 1e-3}) {
    const auto cov = hypo_conditional_covariance(e);
    CHECK(cov(0, 0) == e);
    CHECK(cov(0, 1) == doctest::Approx(e * e / 2));
    CHECK(cov(1, 1) == doctest::Approx(e * e * e / 3));
    const std::vector<double> flat(cov.data().begin(), cov.data().end());
    CHECK(determinant(flat, 2) == doctest::Approx(std::pow(e, 4) / 12).epsilon(1e-12));
  }
  // the b1' term is a shear, so the determinant is unchanged
  const auto sheared = hypo_conditional_covariance(0.1, 2.0);
  const std::vector<double> flat(sheared.data().begin(), sheared.data().end());
  CHECK(determinant(flat, 2) == doctest::Approx(1e-4 / 12).epsilon(1e-10));
}

TEST_CASE("hypo_taylor on the linear model is exact") {
  const auto model = hypoelliptic_linear_model();
  const JacobianFn jac = [](std::span<const double>, std::span<double> out) {
    out[0] = 0;
    out[1] = 0;
    out[2] = 1;
    out[3] = 0;
  };
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.25, 64, 100, {4, 0});
  const auto c = build_coupled(ens, model, {AuxTag::hypo_taylor, jac});
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c.y_end(i, 0) == doctest::Approx(c.x_end(i, 0)).epsilon(1e-13));
    CHECK(c.y_end(i, 1) == doctest::Approx(c.x_end(i, 1)).epsilon(1e-13));
  }
}

TEST_CASE("consistency errors") {
  const auto model = holder_sigma_model(0.5);
  const auto plain = simulate_ensemble(model, 1.0, 16, 4, {1, 0});
  CHECK_THROWS_AS(build_coupled(plain, model, {AuxTag::frozen, {}}), StateError);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.25, 16, 4, {1, 0});
  CHECK_THROWS_AS(build_coupled(ens, model, {AuxTag::taylor, {}}), ParameterError);
  CHECK_THROWS_AS(build_coupled(ens, model, {AuxTag::levy_frozen, {}}), ParameterError);
  CHECK_THROWS_AS(build_coupled(ens, model, {AuxTag::hypo_taylor, c1beta_drift_jacobian(0.5)}),
                  ParameterError);
  const auto stable = stable_model(1.5, 0.5);
  const auto sens = simulate_with_checkpoint(stable, 1.0, 0.25, 16, 4, {1, 0});
  CHECK_THROWS_AS(build_coupled(sens, stable, {AuxTag::frozen, {}}), ParameterError);
  CHECK(aux_tag_from_string("hypo_taylor") == AuxTag::hypo_taylor);
  CHECK_THROWS_AS(aux_tag_from_string("bogus"), ParameterError);
}

TEST_CASE("coupling errors shrink with epsilon for every Brownian auxiliary") {
  const auto model = c1beta_drift_model(0.5);
  // c1beta drift is also C^beta, so frozen/drift_frozen/taylor all apply
  const auto jac = c1beta_drift_jacobian(0.5);
  for (auto tag : {AuxTag::frozen, AuxTag::drift_frozen, AuxTag::taylor}) {
    double prev = 1e300;
    for (double eps : {0.25, 0.0625, 0.015625}) {
      const auto ens = simulate_with_checkpoint(model, 1.0, eps, 96, 4000, {9, 0}, {32, 1});
      const auto c = build_coupled(ens, model, {tag, jac});
      double s = 0;
      for (std::size_t i = 0; i < c.size(); ++i) s += std::abs(c.x_end(i, 0) - c.y_end(i, 0));
      s /= c.size();
      CHECK(s < prev);
      prev = s;
    }
  }
}

TEST_CASE("workers do not change coupled endpoints") {
  const auto model = hypoelliptic_model(0.5);
  const auto ens = simulate_with_checkpoint(model, 1.0, 0.125, 64, 300, {4, 0});
  const auto a = build_coupled(ens, model, {AuxTag::hypo_taylor, hypoelliptic_jacobian(0.5)}, 1);
  const auto b = build_coupled(ens, model, {AuxTag::hypo_taylor, hypoelliptic_jacobian(0.5)}, 8);
  CHECK(a.y_end == b.y_end);
}
