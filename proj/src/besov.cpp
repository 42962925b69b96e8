#include "besovlab/besov.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include "json.hpp"
#include <numbers>
#include <sstream>

#include "besovlab/error.hpp"
#include "besovlab/linalg.hpp"

namespace besovlab {

GridFunction::GridFunction(std::vector<double> origin, double spacing,
                           std::vector<std::size_t> shape, double fill)
    : origin_(std::move(origin)), spacing_(spacing), shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 3) throw ParameterError("grid dimension must be 1, 2 or 3");
  if (origin_.size() != shape_.size()) throw ParameterError("origin and shape disagree");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw ParameterError("grid spacing must be positive");
  std::size_t n = 1;
  for (auto s : shape_) {
    if (s == 0) throw ParameterError("grid shape entries must be positive");
    n *= s;
  }
  values_.assign(n, fill);
}

GridFunction GridFunction::sample(std::vector<double> origin, double spacing,
                                  std::vector<std::size_t> shape, const ScalarField& f) {
  GridFunction g(std::move(origin), spacing, std::move(shape));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = f(g.point(i));
    if (!std::isfinite(v)) throw ParameterError("sampled function is not finite");
    g.values_[i] = v;
  }
  return g;
}

double GridFunction::cell_volume() const { return std::pow(spacing_, static_cast<double>(dim())); }

std::vector<std::ptrdiff_t> GridFunction::index(std::size_t flat) const {
  std::vector<std::ptrdiff_t> idx(dim());
  for (std::size_t a = dim(); a-- > 0;) {
    idx[a] = static_cast<std::ptrdiff_t>(flat % shape_[a]);
    flat /= shape_[a];
  }
  return idx;
}

std::vector<double> GridFunction::point(std::size_t flat) const {
  const auto idx = index(flat);
  std::vector<double> x(dim());
  for (std::size_t a = 0; a < dim(); ++a) x[a] = origin_[a] + static_cast<double>(idx[a]) * spacing_;
  return x;
}

double GridFunction::at(std::span<const std::ptrdiff_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dim(); ++a) {
    if (idx[a] < 0 || idx[a] >= static_cast<std::ptrdiff_t>(shape_[a])) return 0.0;
    flat = flat * shape_[a] + static_cast<std::size_t>(idx[a]);
  }
  return values_[flat];
}

double GridFunction::integrate() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * cell_volume();
}

double GridFunction::lp_norm(double p) const {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p >= 1.0)) throw ParameterError("L^p norm needs p >= 1");
  double s = 0.0;
  if (p == 1.0) {
    for (double v : values_) s += std::abs(v);
    return s * cell_volume();
  }
  for (double v : values_) s += std::pow(std::abs(v), p);
  return std::pow(s * cell_volume(), 1.0 / p);
}

GridFunction GridFunction::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) throw ParameterError("value count does not match grid");
  GridFunction g = *this;
  g.values_ = std::move(values);
  return g;
}

void DifferenceProbe::validate() const {
  if (m < 1) throw ParameterError("difference order must be >= 1");
  if (!phi) throw ParameterError("probe has no test function");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("probe alpha must lie in (0, 1)");
  if (!(phi_norm_bound > 0.0)) throw ParameterError("phi norm bound must be positive");
  for (const auto& h : h_set)
    if (norm(h) > 1.0) throw ParameterError("probe displacements must satisfy |h| <= 1");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<std::ptrdiff_t> grid_steps(const GridFunction& f, std::span<const double> h) {
  if (h.size() != f.dim()) throw ParameterError("displacement dimension does not match grid");
  std::vector<std::ptrdiff_t> steps(h.size());
  for (std::size_t a = 0; a < h.size(); ++a) {
    const double r = h[a] / f.spacing();
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r)))
      throw ParameterError("displacement is not a multiple of the grid spacing");
    steps[a] = static_cast<std::ptrdiff_t>(k);
  }
  return steps;
}

GridFunction delta_m(const GridFunction& f, int m, std::span<const double> h) {
  if (m < 1) throw ParameterError("difference order must be >= 1");
  const auto steps = grid_steps(f, h);
  const std::size_t d = f.dim();
  std::vector<double> origin(d);
  std::vector<std::size_t> shape(d);
  std::vector<std::ptrdiff_t> offset(d);
  for (std::size_t a = 0; a < d; ++a) {
    offset[a] = m * std::max<std::ptrdiff_t>(steps[a], 0);
    origin[a] = f.origin()[a] - static_cast<double>(offset[a]) * f.spacing();
    shape[a] = f.shape()[a] + static_cast<std::size_t>(m * std::abs(steps[a]));
  }
  GridFunction out(origin, f.spacing(), shape);
  std::vector<double> coef(m + 1);
  for (int j = 0; j <= m; ++j) coef[j] = ((m - j) % 2 ? -1.0 : 1.0) * binomial(m, j);

  std::vector<std::ptrdiff_t> idx(d, 0), src(d);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
      for (std::size_t a = 0; a < d; ++a) src[a] = idx[a] - offset[a] + j * steps[a];
      acc += coef[j] * f.at(src);
    }
    out[flat] = acc;
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < static_cast<std::ptrdiff_t>(shape[a])) break;
      idx[a] = 0;
    }
  }
  return out;
}

ScalarField delta_m(ScalarField f, int m, Displacement h) {
  if (m < 1) throw ParameterError("difference order must be >= 1");
  return [f = std::move(f), m, h = std::move(h)](std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
      for (std::size_t a = 0; a < y.size(); ++a) y[a] = x[a] + j * h[a];
      acc += ((m - j) % 2 ? -1.0 : 1.0) * binomial(m, j) * f(y);
    }
    return acc;
  };
}

std::vector<Displacement> dyadic_h_grid(std::size_t dim, int k_min, int k_max, bool diagonal) {
  if (dim == 0 || k_min > k_max) throw ParameterError("empty dyadic displacement grid");
  std::vector<Displacement> out;
  for (int k = k_min; k <= k_max; ++k) {
    const double r = std::exp2(-k);
    for (std::size_t a = 0; a < dim; ++a) {
      Displacement h(dim, 0.0);
      h[a] = r;
      out.push_back(std::move(h));
    }
    if (diagonal && dim > 1 && r * std::sqrt(static_cast<double>(dim)) <= 1.0)
      out.emplace_back(dim, r);
  }
  return out;
}

double besov_seminorm(const GridFunction& f, double s, double p, double q, int m,
                      const std::vector<Displacement>& h_grid) {
  if (!std::isinf(q)) throw ParameterError("only q = infinity is supported");
  if (!(s > 0.0)) throw ParameterError("smoothness index must be positive");
  if (!(m > s)) throw ParameterError("difference order m must exceed the smoothness s");
  if (h_grid.empty()) throw ParameterError("displacement grid is empty");
  double best = 0.0;
  for (const auto& h : h_grid) {
    const double hn = norm(h);
    if (!(hn > 0.0)) throw ParameterError("zero displacement in seminorm grid");
    best = std::max(best, delta_m(f, m, h).lp_norm(p) / std::pow(hn, s));
  }
  return best;
}

GridFunction lizorkin_maximal(const ScalarField& phi, double alpha, const GridFunction& domain,
                              const std::vector<Displacement>& h_grid) {
  if (h_grid.empty()) throw ParameterError("displacement grid is empty");
  GridFunction out = domain.with_values(std::vector<double>(domain.size(), 0.0));
  std::vector<double> y(domain.dim());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const auto x = domain.point(i);
    const double base = phi(x);
    double best = 0.0;
    for (const auto& h : h_grid) {
      for (std::size_t a = 0; a < y.size(); ++a) y[a] = x[a] + h[a];
      best = std::max(best, std::abs(phi(y) - base) / std::pow(norm(h), alpha));
    }
    out[i] = best;
  }
  return out;
}

double lizorkin_seminorm(const ScalarField& phi, double alpha, double q, const GridFunction& domain,
                         const std::vector<Displacement>& h_grid) {
  const double d = static_cast<double>(domain.dim());
  if (!(alpha < 1.0 && alpha > d / q))
    throw ParameterError("difference characterisation needs alpha in (d/q, 1)");
  return lizorkin_maximal(phi, alpha, domain, h_grid).lp_norm(q);
}

namespace {

std::vector<double> discrete_gaussian(double bandwidth, double spacing, std::ptrdiff_t& radius) {
  radius = static_cast<std::ptrdiff_t>(std::ceil(8.0 * bandwidth / spacing));
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double z = static_cast<double>(k) * spacing / bandwidth;
    w[k + radius] = std::exp(-0.5 * z * z);
    total += w[k + radius];
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

GridFunction mollified_density(const Matrix& samples, double bandwidth, const GridFunction& target) {
  if (!(bandwidth > 0.0)) throw ParameterError("bandwidth must be positive");
  if (samples.rows() == 0) throw ParameterError("no samples to mollify");
  const std::size_t d = target.dim();
  if (samples.cols() != d) throw ParameterError("sample dimension does not match grid");
  const auto& shape = target.shape();
  std::vector<double> values(target.size(), 0.0);
  const double weight = 1.0 / (static_cast<double>(samples.rows()) * target.cell_volume());

  // linear binning: each sample splits its mass over the 2^d surrounding nodes
  std::vector<std::ptrdiff_t> base(d);
  std::vector<double> frac(d);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const auto x = samples.row(i);
    bool finite = true;
    for (std::size_t a = 0; a < d; ++a) {
      const double r = (x[a] - target.origin()[a]) / target.spacing();
      if (!std::isfinite(r) || r < -1.0 || r > static_cast<double>(shape[a])) {
        finite = false;
        break;
      }
      const double fl = std::floor(r);
      base[a] = static_cast<std::ptrdiff_t>(fl);
      frac[a] = r - fl;
    }
    if (!finite) continue;
    for (std::size_t corner = 0; corner < (1u << d); ++corner) {
      double w = weight;
      std::size_t flat = 0;
      bool inside = true;
      for (std::size_t a = 0; a < d; ++a) {
        const bool up = (corner >> a) & 1u;
        const std::ptrdiff_t k = base[a] + (up ? 1 : 0);
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(shape[a])) {
          inside = false;
          break;
        }
        w *= up ? frac[a] : 1.0 - frac[a];
        flat = flat * shape[a] + static_cast<std::size_t>(k);
      }
      if (inside && w != 0.0) values[flat] += w;
    }
  }

  std::ptrdiff_t radius = 0;
  const auto kernel = discrete_gaussian(bandwidth, target.spacing(), radius);
  std::vector<double> line, smoothed;
  for (std::size_t axis = 0; axis < d; ++axis) {
    std::size_t stride = 1;
    for (std::size_t a = axis + 1; a < d; ++a) stride *= shape[a];
    const std::size_t len = shape[axis];
    const std::size_t outer = values.size() / (len * stride);
    line.resize(len);
    smoothed.resize(len);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < stride; ++in) {
        const std::size_t start = o * len * stride + in;
        for (std::size_t k = 0; k < len; ++k) line[k] = values[start + k * stride];
        std::fill(smoothed.begin(), smoothed.end(), 0.0);
        for (std::size_t k = 0; k < len; ++k) {
          if (line[k] == 0.0) continue;
          const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(k) - radius);
          const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(len) - 1,
                                                   static_cast<std::ptrdiff_t>(k) + radius);
          for (auto j = lo; j <= hi; ++j)
            smoothed[j] += line[k] * kernel[j - static_cast<std::ptrdiff_t>(k) + radius];
        }
        for (std::size_t k = 0; k < len; ++k) values[start + k * stride] = smoothed[k];
      }
    }
  }
  return target.with_values(std::move(values));
}

double gaussian_difference_l1(std::span<const double> cov, std::size_t d, double epsilon,
                              std::span<const double> h, int m) {
  if (cov.size() != d * d || h.size() != d) throw ParameterError("covariance/displacement shape mismatch");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (m < 1) throw ParameterError("difference order must be >= 1");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(cov[i * d + j] - cov[j * d + i]) > 1e-12 * (std::abs(cov[i * d + j]) + 1e-300))
        throw ParameterError("covariance must be symmetric");
  const auto lower = cholesky(cov, d);
  if (lower.empty())
    throw ParameterError("covariance is not positive definite; use a weighted estimator");
  const auto white = forward_substitute(lower, d, h);
  const double shift = norm(white) / std::sqrt(epsilon);
  if (shift == 0.0) return 0.0;

  // the whitened density is rotation invariant, so only |shift| matters
  std::vector<double> coef(m + 1);
  for (int j = 0; j <= m; ++j) coef[j] = ((m - j) % 2 ? -1.0 : 1.0) * binomial(m, j);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto signed_kernel = [&](double u) {
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double z = u - j * shift;
      acc += coef[j] * std::exp(-0.5 * z * z);
    }
    return acc * inv_sqrt_2pi;
  };
  // split at the sign changes so every piece is smooth, then integrate each
  const double lo = -14.0;
  const double hi = m * shift + 14.0;
  const auto scan = static_cast<int>(std::ceil((hi - lo) * 32.0)) + 64 * (m + 1);
  std::vector<double> cuts{lo};
  double prev_u = lo, prev_v = signed_kernel(lo);
  for (int k = 1; k <= scan; ++k) {
    const double u = lo + (hi - lo) * k / scan;
    const double v = signed_kernel(u);
    if (v == 0.0) continue;  // keep the last nonzero point as the bracket end
    if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
      std::uintmax_t iters = 100;
      const auto root = boost::math::tools::toms748_solve(
          signed_kernel, prev_u, u, prev_v, v, boost::math::tools::eps_tolerance<double>(52), iters);
      cuts.push_back(0.5 * (root.first + root.second));
    }
    prev_u = u;
    prev_v = v;
  }
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    total += std::abs(boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        signed_kernel, cuts[k], cuts[k + 1], 8, 1e-12));
  }
  return total;
}

double fit_gaussian_envelope(std::span<const double> variances, std::span<const double> epsilons,
                             std::span<const double> displacements, int m) {
  double c = 0.0;
  for (double var : variances) {
    const double cov[1] = {var};
    for (double eps : epsilons) {
      for (double h : displacements) {
        const double hv[1] = {h};
        const double v = gaussian_difference_l1(cov, 1, eps, hv, m);
        const double env = std::pow(std::min(1.0, std::abs(h) / std::sqrt(eps)), m);
        c = std::max(c, v / env);
      }
    }
  }
  return c;
}

void write_grid(const GridFunction& f, const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path + " for writing");
  for (std::size_t a = 1; a <= f.dim(); ++a) csv << "x_" << a << ',';
  csv << "value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (double x : f.point(i)) csv << x << ',';
    csv << f[i] << '\n';
  }
  if (!csv) throw IoError("write failed for " + csv_path);
  nlohmann::ordered_json meta;
  meta["dim"] = f.dim();
  meta["origin"] = f.origin();
  meta["spacing"] = f.spacing();
  meta["shape"] = f.shape();
  std::ofstream side(csv_path + ".json");
  if (!side) throw IoError("cannot open " + csv_path + ".json for writing");
  side << meta.dump(2) << '\n';
}

GridFunction read_grid(const std::string& csv_path) {
  std::ifstream side(csv_path + ".json");
  if (!side) throw IoError("missing grid sidecar " + csv_path + ".json");
  const auto meta = nlohmann::json::parse(side);
  GridFunction g(meta.at("origin").get<std::vector<double>>(), meta.at("spacing").get<double>(),
                 meta.at("shape").get<std::vector<std::size_t>>());
  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path);
  std::string line;
  std::getline(csv, line);
  std::size_t i = 0;
  while (std::getline(csv, line) && i < g.size()) {
    const auto pos = line.rfind(',');
    g[i++] = std::stod(line.substr(pos + 1));
  }
  if (i != g.size()) throw IoError(csv_path + ": row count does not match sidecar shape");
  return g;
}

}  // namespace besovlab
