#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "besovlab/drivers.hpp"
#include "besovlab/matrix.hpp"

namespace besovlab {

using StateVec = std::vector<double>;

/// Read-only view of a path on the simulation grid, truncated at the
/// evaluation time. Coefficients see nothing beyond `current()`, which is
/// how adaptedness is enforced.
class PathView {
 public:
  PathView(double time, std::span<const double> states, std::size_t dim)
      : time_(time), states_(states), dim_(dim) {}

  double time() const { return time_; }
  std::size_t dim() const { return dim_; }
  std::size_t length() const { return states_.size() / dim_; }
  std::span<const double> state(std::size_t k) const { return states_.subspan(k * dim_, dim_); }
  std::span<const double> current() const { return state(length() - 1); }

 private:
  double time_;
  std::span<const double> states_;
  std::size_t dim_;
};

/// Writes b(t, path) into `out` (length d).
using DriftFn = std::function<void(const PathView&, std::span<double> out)>;
/// Writes sigma(t, path) into `out` (d x d', row-major).
using DiffusionFn = std::function<void(const PathView&, std::span<double> out)>;
/// Writes the Jacobian of a Markov drift at `state` into `out` (d x d, row-major).
using JacobianFn = std::function<void(std::span<const double> state, std::span<double> out)>;

struct CoefficientSpec {
  DriftFn drift;
  DiffusionFn diffusion;
  std::size_t dim_state = 1;
  std::size_t dim_noise = 1;
  std::optional<double> holder_beta;
  std::optional<double> drift_bound;
  std::optional<double> diffusion_bound;
  /// Lower bound on det(sigma sigma^T), spot-checked during simulation.
  std::optional<double> nondegeneracy_floor;
  /// True when both coefficients read only `current()`. Window re-integration
  /// from a checkpoint is only defined for Markov coefficients.
  bool markov = true;

  void validate() const;
};

struct BrownianDriver {};
using Driver = std::variant<BrownianDriver, StableDriverSpec>;

struct ModelSpec {
  CoefficientSpec coefficients;
  Driver driver = BrownianDriver{};
  StateVec x0;

  bool is_stable() const { return std::holds_alternative<StableDriverSpec>(driver); }
  void validate() const;
};

/// Endpoints of an Euler ensemble and, when a checkpoint was requested, the
/// state at t - epsilon plus everything needed to rebuild the final window:
/// the driving increments and the (path-aware) coefficients frozen at the
/// checkpoint.
struct PathEnsemble {
  Matrix endpoints;
  std::optional<Matrix> checkpoints;
  double t = 0.0;
  double epsilon = 0.0;
  std::size_t n_steps = 0;
  std::size_t window_steps = 0;
  std::size_t dim_noise = 0;
  /// n x (window_steps * d'): increment of step k, noise component l at
  /// column k * d' + l.
  std::optional<Matrix> retained_noise;
  std::optional<Matrix> frozen_drift;      ///< n x d, b at the checkpoint
  std::optional<Matrix> frozen_diffusion;  ///< n x (d d'), sigma at the checkpoint

  std::size_t size() const { return endpoints.rows(); }
  std::size_t dim() const { return endpoints.cols(); }
  double window_dt() const { return epsilon / static_cast<double>(window_steps); }
};

struct CheckpointOptions {
  /// Steps on [t - epsilon, t]. Zero selects round(n_steps * epsilon / t).
  std::size_t window_steps = 0;
  std::size_t workers = 1;
};

/// Euler–Maruyama on a uniform grid of n_steps over [0, t]. Path i draws
/// from stream (seed.master_seed, seed.stream_id + i).
PathEnsemble simulate_ensemble(const ModelSpec& model, double t, std::size_t n_steps,
                               std::size_t n_paths, SeedSpec seed, std::size_t workers = 1);

/// Euler–Maruyama on the union of a uniform grid over [0, t - epsilon] and
/// one over [t - epsilon, t], so the checkpoint is an exact grid point.
/// `n_steps` counts both parts.
PathEnsemble simulate_with_checkpoint(const ModelSpec& model, double t, double epsilon,
                                      std::size_t n_steps, std::size_t n_paths,
                                      SeedSpec seed, const CheckpointOptions& options = {});

/// Re-runs the final window of path `index` from its checkpoint with the
/// retained increments. Reproduces the endpoint bit for bit.
StateVec reintegrate_window(const ModelSpec& model, const PathEnsemble& ensemble,
                            std::size_t index);

/// Euler update shared by the simulator and the auxiliary builders so that
/// coinciding dynamics give bit-identical states:
/// x_j += a_j dt + sum_l sigma_jl dnoise_l.
inline void euler_update(std::span<double> x, std::span<const double> drift, double dt,
                         std::span<const double> sigma, std::span<const double> dnoise) {
  const std::size_t d = x.size();
  const std::size_t dn = dnoise.size();
  for (std::size_t j = 0; j < d; ++j) {
    double acc = drift[j] * dt;
    for (std::size_t l = 0; l < dn; ++l) acc += sigma[j * dn + l] * dnoise[l];
    x[j] += acc;
  }
}

/// CSV dump: path_id, x_1..x_d, and c_1..c_d when checkpoints exist.
void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& out);
void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path);
/// Reads endpoints (and checkpoints, if the header has c_ columns).
PathEnsemble read_ensemble_csv(const std::string& path);

}  // namespace besovlab
