#include "besovlab/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "besovlab/error.hpp"
#include "besovlab/linalg.hpp"

namespace besovlab {

LacunarySeries::LacunarySeries(double beta, double frequency, int octaves) : beta_(beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("lacunary series needs beta in (0,1)");
  if (!(frequency > 0.0) || octaves < 1) throw ParameterError("bad lacunary series parameters");
  for (int k = 0; k < octaves; ++k) {
    amplitudes_.push_back(std::exp2(-k * beta));
    frequencies_.push_back(frequency * std::exp2(k));
  }
}

double LacunarySeries::value(double x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < amplitudes_.size(); ++k)
    s += amplitudes_[k] * std::cos(frequencies_[k] * x);
  return s;
}

double LacunarySeries::antiderivative(double x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < amplitudes_.size(); ++k)
    s += amplitudes_[k] / frequencies_[k] * std::sin(frequencies_[k] * x);
  return s;
}

double LacunarySeries::sup_norm() const {
  double s = 0.0;
  for (double a : amplitudes_) s += a;
  return s;
}

double LacunarySeries::holder_constant() const {
  const double lambda = frequencies_.front();
  return std::pow(lambda, beta_) *
         (1.0 / (1.0 - std::exp2(beta_ - 1.0)) + 2.0 / (1.0 - std::exp2(-beta_)));
}

namespace {

ModelSpec scalar_model(std::function<double(double)> b, std::function<double(double)> sigma,
                       double x0) {
  ModelSpec m;
  m.coefficients.drift = [b = std::move(b)](const PathView& p, std::span<double> out) {
    out[0] = b(p.current()[0]);
  };
  m.coefficients.diffusion = [sigma = std::move(sigma)](const PathView& p, std::span<double> out) {
    out[0] = sigma(p.current()[0]);
  };
  m.x0 = {x0};
  return m;
}

}  // namespace

ModelSpec brownian_model(std::size_t dim, StateVec x0) {
  if (dim == 0) throw ParameterError("dimension must be positive");
  ModelSpec m;
  m.coefficients.dim_state = dim;
  m.coefficients.dim_noise = dim;
  m.coefficients.drift = [](const PathView&, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  m.coefficients.diffusion = [dim](const PathView&, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) out[i * dim + i] = 1.0;
  };
  m.coefficients.drift_bound = 0.0;
  m.coefficients.diffusion_bound = 1.0;
  m.coefficients.nondegeneracy_floor = 1.0;
  m.x0 = x0.empty() ? StateVec(dim, 0.0) : std::move(x0);
  return m;
}

ModelSpec constant_model(double mu, double sigma, double x0) {
  auto m = scalar_model([mu](double) { return mu; }, [sigma](double) { return sigma; }, x0);
  m.coefficients.drift_bound = std::abs(mu);
  m.coefficients.diffusion_bound = std::abs(sigma);
  return m;
}

ModelSpec holder_sigma_model(double beta, double amplitude) {
  const LacunarySeries w(beta);
  const double slack = 2.0 - amplitude * w.sup_norm();
  if (!(slack > 0.0)) throw ParameterError("amplitude too large: sigma would degenerate");
  auto m = scalar_model([](double) { return 0.0; },
                        [w, amplitude](double x) { return 2.0 + amplitude * w.value(x); }, 0.0);
  m.coefficients.holder_beta = beta;
  m.coefficients.drift_bound = 0.0;
  m.coefficients.diffusion_bound = 2.0 + amplitude * w.sup_norm();
  m.coefficients.nondegeneracy_floor = slack * slack;
  return m;
}

ModelSpec kink_sigma_model(double beta) {
  auto m = scalar_model([](double) { return 0.0; },
                        [beta](double x) { return 2.0 + std::min(1.0, std::pow(std::abs(x), beta)); },
                        0.0);
  m.coefficients.holder_beta = beta;
  m.coefficients.diffusion_bound = 3.0;
  m.coefficients.nondegeneracy_floor = 4.0;
  return m;
}

ModelSpec smooth_sigma_model() {
  auto m = scalar_model([](double) { return 0.0; },
                        [](double x) { return 1.5 + 0.5 * std::sin(x); }, 0.0);
  m.coefficients.holder_beta = 1.0;
  m.coefficients.diffusion_bound = 2.0;
  m.coefficients.nondegeneracy_floor = 1.0;
  return m;
}

ModelSpec holder_drift_model(double beta, double amplitude) {
  const LacunarySeries w(beta);
  auto m = scalar_model([w, amplitude](double x) { return amplitude * w.value(x); },
                        [](double) { return 1.0; }, 0.0);
  m.coefficients.holder_beta = beta;
  m.coefficients.drift_bound = amplitude * w.sup_norm();
  m.coefficients.diffusion_bound = 1.0;
  m.coefficients.nondegeneracy_floor = 1.0;
  return m;
}

ModelSpec c1beta_drift_model(double beta, double amplitude) {
  const LacunarySeries w(beta);
  auto m = scalar_model([w, amplitude](double x) { return amplitude * w.antiderivative(x); },
                        [](double) { return 1.0; }, 0.0);
  m.coefficients.holder_beta = beta;
  m.coefficients.diffusion_bound = 1.0;
  m.coefficients.nondegeneracy_floor = 1.0;
  return m;
}

JacobianFn c1beta_drift_jacobian(double beta, double amplitude) {
  const LacunarySeries w(beta);
  return [w, amplitude](std::span<const double> x, std::span<double> out) {
    out[0] = amplitude * w.value(x[0]);
  };
}

namespace {

ModelSpec two_block_model(std::function<double(double)> b1, std::function<double(double)> b2) {
  ModelSpec m;
  m.coefficients.dim_state = 2;
  m.coefficients.dim_noise = 1;
  m.coefficients.drift = [b1 = std::move(b1), b2 = std::move(b2)](const PathView& p,
                                                                  std::span<double> out) {
    const double x1 = p.current()[0];
    out[0] = b1(x1);
    out[1] = b2(x1);
  };
  m.coefficients.diffusion = [](const PathView&, std::span<double> out) {
    out[0] = 1.0;
    out[1] = 0.0;
  };
  m.x0 = {0.0, 0.0};
  return m;
}

}  // namespace

ModelSpec hypoelliptic_linear_model() {
  return two_block_model([](double) { return 0.0; }, [](double x1) { return x1; });
}

ModelSpec hypoelliptic_model(double beta, double amplitude) {
  const LacunarySeries w(beta);
  auto m = two_block_model([w, amplitude](double x1) { return amplitude * w.antiderivative(x1); },
                           [](double x1) { return x1 + 0.5 * std::sin(x1); });
  m.coefficients.holder_beta = beta;
  return m;
}

JacobianFn hypoelliptic_jacobian(double beta, double amplitude) {
  const LacunarySeries w(beta);
  return [w, amplitude](std::span<const double> x, std::span<double> out) {
    out[0] = amplitude * w.value(x[0]);
    out[1] = 0.0;
    out[2] = 1.0 + 0.5 * std::cos(x[0]);
    out[3] = 0.0;
  };
}

ModelSpec squared_bessel_model() {
  auto m = scalar_model([](double) { return 1.0; },
                        [](double x) { return 2.0 * std::sqrt(std::max(x, 0.0)); }, 0.0);
  m.coefficients.holder_beta = 0.5;
  m.coefficients.drift_bound = 1.0;
  return m;
}

ModelSpec degenerate_sigma_model(double beta, double x0) {
  auto m = scalar_model([](double) { return 0.0; },
                        [beta](double x) { return std::pow(std::min(1.0, std::abs(x)), beta); },
                        x0);
  m.coefficients.holder_beta = beta;
  m.coefficients.diffusion_bound = 1.0;
  return m;
}

double running_max_profile(double beta, double running_max) {
  return 1.0 + 0.5 * std::pow(std::min(1.0, running_max), beta);
}

ModelSpec running_max_model(double beta) {
  ModelSpec m;
  m.coefficients.markov = false;
  m.coefficients.drift = [](const PathView&, std::span<double> out) { out[0] = 0.0; };
  m.coefficients.diffusion = [beta](const PathView& p, std::span<double> out) {
    double sup = 0.0;
    for (std::size_t k = 0; k < p.length(); ++k) sup = std::max(sup, std::abs(p.state(k)[0]));
    out[0] = running_max_profile(beta, sup);
  };
  m.coefficients.holder_beta = beta;
  m.coefficients.diffusion_bound = 1.5;
  m.coefficients.nondegeneracy_floor = 1.0;
  m.x0 = {0.0};
  return m;
}

ModelSpec stable_model(double alpha_stable, double beta, double amplitude) {
  StableDriverSpec spec{alpha_stable, 1.0};
  spec.validate();
  ModelSpec m;
  if (amplitude == 0.0) {
    m = constant_model(0.0, 2.0);
  } else {
    m = holder_sigma_model(beta, amplitude);
  }
  m.driver = spec;
  return m;
}

ModelSpec rough_drift_model(double gamma_sing, double truncation, double center) {
  if (!(gamma_sing > 0.0 && gamma_sing < 1.0)) throw ParameterError("singularity order must lie in (0,1)");
  if (!(truncation > 0.0)) throw ParameterError("truncation level must be positive");
  auto m = scalar_model(
      [gamma_sing, truncation, center](double x) {
        const double r = std::abs(x - center);
        if (r > 1.0 || r == 0.0) return 0.0;
        return std::copysign(std::min(truncation, std::pow(r, -gamma_sing)), x - center);
      },
      [](double) { return 1.0; }, center);
  m.coefficients.drift_bound = truncation;
  m.coefficients.nondegeneracy_floor = 1.0;
  return m;
}

std::function<double(std::span<const double>)> inverse_sigma_weight(const CoefficientSpec& c,
                                                                    int m) {
  if (c.dim_state != c.dim_noise) throw ParameterError("inverse-sigma weight needs square sigma");
  if (!c.markov) throw ParameterError("inverse-sigma weight needs a Markov diffusion");
  return [c, m](std::span<const double> x) {
    std::vector<double> sigma(c.dim_state * c.dim_noise);
    c.diffusion(PathView(0.0, x, c.dim_state), sigma);
    return std::pow(smallest_singular_value(sigma, c.dim_state), m);
  };
}

ModelSpec model_by_name(const std::string& name, double beta, double alpha_stable) {
  if (name == "brownian") return brownian_model(1);
  if (name == "holder_sigma") return holder_sigma_model(beta);
  if (name == "kink_sigma") return kink_sigma_model(beta);
  if (name == "smooth_sigma") return smooth_sigma_model();
  if (name == "holder_drift") return holder_drift_model(beta);
  if (name == "c1beta_drift") return c1beta_drift_model(beta);
  if (name == "hypoelliptic_linear") return hypoelliptic_linear_model();
  if (name == "hypoelliptic") return hypoelliptic_model(beta);
  if (name == "squared_bessel") return squared_bessel_model();
  if (name == "degenerate_sigma") return degenerate_sigma_model(beta);
  if (name == "running_max") return running_max_model(beta);
  if (name == "stable") return stable_model(alpha_stable, beta);
  throw UsageError("unknown model '" + name + "'");
}

std::vector<std::string> model_names() {
  return {"brownian",     "holder_sigma",        "kink_sigma",   "smooth_sigma",
          "holder_drift", "c1beta_drift",        "hypoelliptic_linear", "hypoelliptic",
          "squared_bessel", "degenerate_sigma",  "running_max",  "stable"};
}

}  // namespace besovlab
