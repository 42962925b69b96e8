#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "besovlab/models.hpp"

namespace besovlab {

/// Lacunary cosine series W(x) = sum_{k<K} 2^{-k beta} cos(lambda 2^k x).
/// Hoelder of order beta uniformly in x, down to the scale 2^{-K}/lambda, so
/// E|W(x + delta) - W(x)| ~ |delta|^beta for a spread-out x. Coefficients
/// with a single kink only show this behaviour near the kink.
class LacunarySeries {
 public:
  LacunarySeries(double beta, double frequency = 0.5, int octaves = 16);

  double beta() const { return beta_; }
  double value(double x) const;
  /// Antiderivative sum 2^{-k(1+beta)} sin(lambda 2^k x) / lambda, a C^{1+beta}
  /// function whose derivative is `value`.
  double antiderivative(double x) const;
  double sup_norm() const;
  /// Certified bound on [W]_{C^beta}: lambda^beta (1/(1-2^{beta-1}) + 2/(1-2^{-beta})).
  double holder_constant() const;

 private:
  double beta_;
  std::vector<double> amplitudes_;
  std::vector<double> frequencies_;
};

// Model catalogue. Unless noted, models are one-dimensional with x0 = 0.

/// b = 0, sigma = I_d.
ModelSpec brownian_model(std::size_t dim = 1, StateVec x0 = {});
/// Constant drift mu and constant scalar diffusion sigma (1-d).
ModelSpec constant_model(double mu, double sigma, double x0 = 0.0);
/// b = 0, sigma(x) = 2 + amplitude W_beta(x). Nondegenerate when
/// amplitude * sup|W| < 2.
ModelSpec holder_sigma_model(double beta, double amplitude = 0.3);
/// b = 0, sigma(x) = 2 + min(1, |x|^beta).
ModelSpec kink_sigma_model(double beta);
/// b = 0, sigma(x) = 1.5 + 0.5 sin x.
ModelSpec smooth_sigma_model();
/// b = amplitude W_beta (C^beta), sigma = 1.
ModelSpec holder_drift_model(double beta, double amplitude = 0.3);
/// b = amplitude * antiderivative of W_beta (C^{1+beta}), sigma = 1, with the
/// exact derivative handle.
ModelSpec c1beta_drift_model(double beta, double amplitude = 0.5);
JacobianFn c1beta_drift_jacobian(double beta, double amplitude = 0.5);
/// dX1 = b1 dt + dB, dX2 = b2 dt with b1 = 0, b2 = x1.
ModelSpec hypoelliptic_linear_model();
/// dX1 = b1(X1) dt + dB, dX2 = (X1 + 0.5 sin X1) dt with b1 = amplitude *
/// antiderivative of W_beta.
ModelSpec hypoelliptic_model(double beta, double amplitude = 0.5);
JacobianFn hypoelliptic_jacobian(double beta, double amplitude = 0.5);
/// dX = dt + 2 sqrt(X^+) dW, X0 = 0: the law of B_t^2.
ModelSpec squared_bessel_model();
/// b = 0, sigma(x) = min(1, |x|)^beta, singular at 0; x0 = 1.
ModelSpec degenerate_sigma_model(double beta, double x0 = 1.0);
/// sigma(t, omega) = f(sup_{r <= t} |omega_r|) with f(m) = 1 + 0.5 min(1, m)^beta.
ModelSpec running_max_model(double beta);
double running_max_profile(double beta, double running_max);
/// Stable-driven: b = 0, sigma(x) = 2 + amplitude W_beta(x) (amplitude 0 gives
/// constant sigma = 2).
ModelSpec stable_model(double alpha_stable, double beta, double amplitude = 0.3);
/// b(x) = sign(x - c) min(M, |x - c|^{-gamma}) on |x - c| <= 1, zero outside;
/// sigma = 1. Lies in L^p for every p < 1/gamma.
ModelSpec rough_drift_model(double gamma_sing, double truncation, double center = 0.0);

/// Catalogue lookup for front ends: brownian, holder_sigma, kink_sigma,
/// smooth_sigma, holder_drift, c1beta_drift, hypoelliptic_linear,
/// hypoelliptic, squared_bessel, degenerate_sigma, running_max, stable.
/// Unknown names raise UsageError.
ModelSpec model_by_name(const std::string& name, double beta = 0.5, double alpha_stable = 1.5);
std::vector<std::string> model_names();

/// Weight |sigma^{-1}(x)|^{-m} for a Markov diffusion handle.
std::function<double(std::span<const double>)> inverse_sigma_weight(const CoefficientSpec& c,
                                                                    int m);

}  // namespace besovlab
