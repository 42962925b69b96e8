#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "besovlab/matrix.hpp"

namespace besovlab {

using ScalarField = std::function<double(std::span<const double>)>;
using Displacement = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Function sampled on the uniform grid origin + i * spacing,
/// 0 <= i_a < shape[a], with d <= 3. Outside the box it is treated as zero,
/// and integrals use the rectangle rule with cell volume spacing^d.
class GridFunction {
 public:
  GridFunction(std::vector<double> origin, double spacing, std::vector<std::size_t> shape,
               double fill = 0.0);

  /// Samples f at every grid point.
  static GridFunction sample(std::vector<double> origin, double spacing,
                             std::vector<std::size_t> shape, const ScalarField& f);

  std::size_t dim() const { return shape_.size(); }
  double spacing() const { return spacing_; }
  const std::vector<double>& origin() const { return origin_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  double cell_volume() const;
  double volume() const { return cell_volume() * static_cast<double>(size()); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  std::vector<double> point(std::size_t flat) const;
  std::vector<std::ptrdiff_t> index(std::size_t flat) const;
  /// Value at a multi-index, zero outside the box.
  double at(std::span<const std::ptrdiff_t> idx) const;

  double integrate() const;
  /// Rectangle-rule L^p norm; p = kInfinity gives the max of |f|.
  double lp_norm(double p) const;

  /// Same grid, new values.
  GridFunction with_values(std::vector<double> values) const;

 private:
  std::vector<double> origin_;
  double spacing_;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

/// Test function together with the difference order and displacements it is
/// probed with. Every displacement must satisfy |h| <= 1.
struct DifferenceProbe {
  int m = 1;
  std::vector<Displacement> h_set;
  ScalarField phi;
  /// Declared Hoelder exponent of phi, in (0, 1).
  double alpha = 0.5;
  /// Certified upper bound for the C^alpha_b norm of phi.
  double phi_norm_bound = 1.0;

  void validate() const;
};

/// Binomial coefficient as a double.
double binomial(int n, int k);

/// Displacement in whole grid steps per axis; ParameterError if h is not an
/// integer multiple of the spacing.
std::vector<std::ptrdiff_t> grid_steps(const GridFunction& f, std::span<const double> h);

/// (Delta_h^m f)(x) = sum_j (-1)^{m-j} C(m,j) f(x + j h) for the zero
/// extension of f, returned on the enlarged box that holds its support.
GridFunction delta_m(const GridFunction& f, int m, std::span<const double> h);

/// Same operator on a function handle.
ScalarField delta_m(ScalarField f, int m, Displacement h);

/// Dyadic displacements 2^-k e_a (every axis) plus 2^-k (1,...,1) when
/// `diagonal` is set and the diagonal has norm <= 1, for k in [k_min, k_max].
std::vector<Displacement> dyadic_h_grid(std::size_t dim, int k_min, int k_max,
                                        bool diagonal = true);

double norm(std::span<const double> v);

/// [f]_{B^s_{p,q}} with q = infinity: max over h_grid of
/// ||Delta_h^m f||_{L^p} / |h|^s.
double besov_seminorm(const GridFunction& f, double s, double p, double q, int m,
                      const std::vector<Displacement>& h_grid);

/// Phi(x) = max over h_grid of |phi(x + h) - phi(x)| / |h|^alpha on the
/// points of `domain`.
GridFunction lizorkin_maximal(const ScalarField& phi, double alpha, const GridFunction& domain,
                              const std::vector<Displacement>& h_grid);

/// ||Phi||_{L^q} by quadrature: the difference form of [phi]_{F^alpha_{q,inf}},
/// valid for alpha in (d/q, 1).
double lizorkin_seminorm(const ScalarField& phi, double alpha, double q,
                         const GridFunction& domain, const std::vector<Displacement>& h_grid);

/// Gaussian-kernel density estimate of `samples` (n x d) on the points of
/// `target`: linear binning onto the grid followed by separable convolution
/// with the sampled Gaussian kernel of standard deviation `bandwidth`,
/// normalised to unit discrete mass and truncated at 8 bandwidths. Mass that
/// falls outside the box is dropped, so the quadrature mass is at most 1.
GridFunction mollified_density(const Matrix& samples, double bandwidth,
                               const GridFunction& target);

/// ||Delta_{-h}^m g||_{L^1} for g the N(0, eps cov) density (cov d x d SPD).
/// Whitening reduces it to a one-dimensional integral in |L^{-1} h| / sqrt(eps),
/// evaluated by adaptive Gauss–Kronrod.
double gaussian_difference_l1(std::span<const double> cov, std::size_t d, double epsilon,
                              std::span<const double> h, int m);

/// Smallest C with gaussian_difference_l1(cov, eps, h, m) <= C min(1, |h|/sqrt(eps))^m
/// over the panel (1-d variances, epsilons, displacements).
double fit_gaussian_envelope(std::span<const double> variances, std::span<const double> epsilons,
                             std::span<const double> displacements, int m);

/// CSV with columns x_1..x_d,value plus a JSON sidecar `<path>.json` holding
/// origin, spacing and shape.
void write_grid(const GridFunction& f, const std::string& csv_path);
GridFunction read_grid(const std::string& csv_path);

}  // namespace besovlab
