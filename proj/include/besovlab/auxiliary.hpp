#pragma once

#include <optional>
#include <string>

#include "besovlab/matrix.hpp"
#include "besovlab/models.hpp"

namespace besovlab {

/// Which auxiliary process Y^eps to build on [t - eps, t]. With y the
/// checkpoint state, W_r the driving noise accumulated since t - eps, and
/// coefficients frozen at the checkpoint:
///   frozen        Y = y + sigma(y) W
///   drift_frozen  Y = y + (s - (t-eps)) b(y) + sigma(y) W
///   taylor        drift b(y) + Db(y) sigma(y) W_r, integrated left-point
///   hypo_taylor   two-block system: first block as taylor, second block
///                 driven by b2(y) + d_1 b2(y) (Y^1_r - y^1)
///   levy_frozen   frozen, with the retained stable increments
enum class AuxTag { frozen, drift_frozen, taylor, hypo_taylor, levy_frozen };

std::string to_string(AuxTag tag);
AuxTag aux_tag_from_string(const std::string& name);

struct AuxKind {
  AuxTag tag = AuxTag::frozen;
  /// Jacobian of the drift, required by taylor and hypo_taylor.
  JacobianFn drift_jacobian;
};

/// Pathwise pairs (X_t, Y_t^eps) driven by the same increments.
struct CoupledEnsemble {
  Matrix x_end;
  Matrix y_end;
  Matrix checkpoint;
  double epsilon = 0.0;
  double t = 0.0;
  AuxTag aux = AuxTag::frozen;
  /// Stable index of the driver; set for stable-driven ensembles.
  std::optional<double> stable_alpha;

  std::size_t size() const { return x_end.rows(); }
};

/// Rebuilds Y^eps for every path from the checkpoint, the frozen coefficients
/// and the retained noise. The window recursion uses the same Euler update as
/// the simulator, so when the auxiliary dynamics coincide with the model (for
/// example constant sigma and b = 0 under `frozen`) X and Y agree exactly.
CoupledEnsemble build_coupled(const PathEnsemble& ensemble, const ModelSpec& model,
                              const AuxKind& aux, std::size_t workers = 1);

/// Covariance of (B_eps + c int_0^eps B_s ds, int_0^eps B_s ds) for a standard
/// Brownian motion, with c = b1_deriv. At c = 0 this is
/// [[eps, eps^2/2], [eps^2/2, eps^3/3]], eigenvalues of order eps and eps^3.
Matrix hypo_conditional_covariance(double epsilon, double b1_deriv = 0.0);

/// Var(Y_t^eps | X_{t-eps}) for the taylor auxiliary with sigma = 1:
/// eps + b' eps^2 + b'^2 eps^3 / 3.
double taylor_conditional_variance(double epsilon, double b_deriv);

}  // namespace besovlab
