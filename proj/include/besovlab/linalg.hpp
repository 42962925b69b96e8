#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace besovlab {

// Small dense helpers for the d <= 3 matrices that appear in coefficients
// and covariances. All matrices are row-major.

/// Determinant of an n x n matrix by partial-pivot elimination.
double determinant(std::span<const double> a, std::size_t n);

/// det(sigma sigma^T) for a d x dn matrix sigma.
double gram_determinant(std::span<const double> sigma, std::size_t d, std::size_t dn);

/// Lower Cholesky factor of an SPD matrix; empty when not positive definite.
std::vector<double> cholesky(std::span<const double> a, std::size_t n);

/// Solves L x = b for lower-triangular L.
std::vector<double> forward_substitute(std::span<const double> lower, std::size_t n,
                                       std::span<const double> b);

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
std::vector<double> symmetric_eigenvalues(std::span<const double> a, std::size_t n);

/// inf_{|z|=1} |sigma z| for a square sigma, i.e. 1/|sigma^{-1}| (0 if singular).
double smallest_singular_value(std::span<const double> sigma, std::size_t n);

}  // namespace besovlab
