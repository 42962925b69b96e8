#include "besovlab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace besovlab {

double determinant(std::span<const double> a_in, std::size_t n) {
  std::vector<double> a(a_in.begin(), a_in.end());
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      det = -det;
    }
    const double p = a[col * n + col];
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / p;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
    }
  }
  return det;
}

double gram_determinant(std::span<const double> sigma, std::size_t d, std::size_t dn) {
  if (d == 1) {
    double s = 0.0;
    for (std::size_t l = 0; l < dn; ++l) s += sigma[l] * sigma[l];
    return s;
  }
  std::vector<double> g(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t l = 0; l < dn; ++l) g[i * d + j] += sigma[i * dn + l] * sigma[j * dn + l];
  return determinant(g, d);
}

std::vector<double> cholesky(std::span<const double> a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
    if (!(diag > 0.0)) return {};
    l[j * n + j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = v / l[j * n + j];
    }
  }
  return l;
}

std::vector<double> forward_substitute(std::span<const double> lower, std::size_t n,
                                       std::span<const double> b) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= lower[i * n + k] * x[k];
    x[i] = v / lower[i * n + i];
  }
  return x;
}

std::vector<double> symmetric_eigenvalues(std::span<const double> a_in, std::size_t n) {
  std::vector<double> a(a_in.begin(), a_in.end());
  if (n == 2) {
    // closed form keeps tiny eigenvalues accurate relative to their size
    const double p = a[0], q = a[1], r = a[3];
    const double mean = 0.5 * (p + r);
    const double rad = std::hypot(0.5 * (p - r), q);
    const double big = mean >= 0 ? mean + rad : mean - rad;
    const double det = p * r - q * q;
    const double small = big != 0.0 ? det / big : 0.0;
    std::vector<double> ev{small, big};
    std::sort(ev.begin(), ev.end());
    return ev;
  }
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

double smallest_singular_value(std::span<const double> sigma, std::size_t n) {
  if (n == 1) return std::abs(sigma[0]);
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) g[i * n + j] += sigma[k * n + i] * sigma[k * n + j];
  const auto ev = symmetric_eigenvalues(g, n);
  return std::sqrt(std::max(ev.front(), 0.0));
}

}  // namespace besovlab
