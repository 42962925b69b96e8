#include "besovlab/auxiliary.hpp"

#include <vector>

#include "besovlab/error.hpp"
#include "besovlab/parallel.hpp"

namespace besovlab {

std::string to_string(AuxTag tag) {
  switch (tag) {
    case AuxTag::frozen: return "frozen";
    case AuxTag::drift_frozen: return "drift_frozen";
    case AuxTag::taylor: return "taylor";
    case AuxTag::hypo_taylor: return "hypo_taylor";
    case AuxTag::levy_frozen: return "levy_frozen";
  }
  return "unknown";
}

AuxTag aux_tag_from_string(const std::string& name) {
  for (auto tag : {AuxTag::frozen, AuxTag::drift_frozen, AuxTag::taylor, AuxTag::hypo_taylor,
                   AuxTag::levy_frozen})
    if (to_string(tag) == name) return tag;
  throw ParameterError("unknown auxiliary kind '" + name + "'");
}

namespace {

void check_consistency(const PathEnsemble& ens, const ModelSpec& model, const AuxKind& aux) {
  if (!ens.checkpoints || !ens.retained_noise || !ens.frozen_drift || !ens.frozen_diffusion)
    throw StateError("ensemble lacks checkpoint data; use simulate_with_checkpoint");
  const auto& c = model.coefficients;
  if (ens.dim() != c.dim_state || ens.dim_noise != c.dim_noise)
    throw ParameterError("ensemble and model dimensions disagree");
  const bool needs_jacobian = aux.tag == AuxTag::taylor || aux.tag == AuxTag::hypo_taylor;
  if (needs_jacobian && !aux.drift_jacobian)
    throw ParameterError(to_string(aux.tag) + " auxiliary needs a drift derivative handle");
  if (aux.tag == AuxTag::levy_frozen && !model.is_stable())
    throw ParameterError("levy_frozen auxiliary needs a stable driver");
  if (aux.tag != AuxTag::levy_frozen && model.is_stable())
    throw ParameterError("stable-driven models take the levy_frozen auxiliary");
  if (aux.tag == AuxTag::hypo_taylor && (c.dim_state != 2 || c.dim_noise != 1))
    throw ParameterError("hypo_taylor needs the two-block structure (d = 2, d' = 1)");
}

}  // namespace

CoupledEnsemble build_coupled(const PathEnsemble& ens, const ModelSpec& model,
                              const AuxKind& aux, std::size_t workers) {
  check_consistency(ens, model, aux);
  const std::size_t n = ens.size();
  const std::size_t d = ens.dim();
  const std::size_t dn = ens.dim_noise;
  const double dt = ens.window_dt();

  CoupledEnsemble out;
  out.x_end = ens.endpoints;
  out.checkpoint = *ens.checkpoints;
  out.y_end = Matrix(n, d);
  out.epsilon = ens.epsilon;
  out.t = ens.t;
  out.aux = aux.tag;
  if (const auto* s = std::get_if<StableDriverSpec>(&model.driver)) out.stable_alpha = s->alpha_stable;

  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> a(d), jac(d * d), w(dn), sw(d), zeros(d, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto y0 = ens.checkpoints->row(i);
      const auto b0 = ens.frozen_drift->row(i);
      const auto s0 = ens.frozen_diffusion->row(i);
      const auto noise = ens.retained_noise->row(i);
      auto y = out.y_end.row(i);
      std::copy(y0.begin(), y0.end(), y.begin());
      if (aux.drift_jacobian) aux.drift_jacobian(y0, jac);
      std::fill(w.begin(), w.end(), 0.0);

      for (std::size_t k = 0; k < ens.window_steps; ++k) {
        const auto dnoise = noise.subspan(k * dn, dn);
        switch (aux.tag) {
          case AuxTag::frozen:
          case AuxTag::levy_frozen:
            euler_update(y, zeros, dt, s0, dnoise);
            break;
          case AuxTag::drift_frozen:
            euler_update(y, b0, dt, s0, dnoise);
            break;
          case AuxTag::taylor: {
            // A_r = b(y) + Db(y) sigma(y) W_r, W at the left end point
            for (std::size_t j = 0; j < d; ++j) {
              sw[j] = 0.0;
              for (std::size_t l = 0; l < dn; ++l) sw[j] += s0[j * dn + l] * w[l];
            }
            for (std::size_t j = 0; j < d; ++j) {
              a[j] = b0[j];
              for (std::size_t l = 0; l < d; ++l) a[j] += jac[j * d + l] * sw[l];
            }
            euler_update(y, a, dt, s0, dnoise);
            break;
          }
          case AuxTag::hypo_taylor: {
            // first block varies with the noise only, second with Y^1 - y^1
            a[0] = b0[0] + jac[0] * s0[0] * w[0];
            a[1] = b0[1] + jac[2] * (y[0] - y0[0]);
            euler_update(y, a, dt, s0, dnoise);
            break;
          }
        }
        for (std::size_t l = 0; l < dn; ++l) w[l] += dnoise[l];
      }
    }
  });
  return out;
}

Matrix hypo_conditional_covariance(double epsilon, double b1_deriv) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  const double e1 = epsilon, e2 = epsilon * epsilon / 2.0, e3 = epsilon * epsilon * epsilon / 3.0;
  const double c = b1_deriv;
  Matrix cov(2, 2);
  cov(0, 0) = e1 + 2.0 * c * e2 + c * c * e3;
  cov(0, 1) = e2 + c * e3;
  cov(1, 0) = cov(0, 1);
  cov(1, 1) = e3;
  return cov;
}

double taylor_conditional_variance(double epsilon, double b_deriv) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  return epsilon + b_deriv * epsilon * epsilon +
         b_deriv * b_deriv * epsilon * epsilon * epsilon / 3.0;
}

}  // namespace besovlab
