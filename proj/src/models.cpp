#include "besovlab/models.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "besovlab/error.hpp"
#include "besovlab/linalg.hpp"
#include "besovlab/parallel.hpp"

namespace besovlab {

void CoefficientSpec::validate() const {
  if (!drift || !diffusion) throw ParameterError("coefficient handles must be set");
  if (dim_state == 0 || dim_noise == 0) throw ParameterError("dimensions must be positive");
  if (holder_beta && !(*holder_beta > 0.0 && *holder_beta <= 1.0))
    throw ParameterError("declared Hoelder exponent must lie in (0,1]");
  if (nondegeneracy_floor && *nondegeneracy_floor < 0.0)
    throw ParameterError("nondegeneracy floor must be nonnegative");
}

void ModelSpec::validate() const {
  coefficients.validate();
  if (x0.size() != coefficients.dim_state)
    throw ParameterError("initial state has dimension " + std::to_string(x0.size()) +
                         ", model expects " + std::to_string(coefficients.dim_state));
  if (const auto* stable = std::get_if<StableDriverSpec>(&driver)) {
    stable->validate();
    if (coefficients.dim_noise != coefficients.dim_state)
      throw ParameterError("stable driver requires dim_noise == dim_state");
  }
}

namespace {

struct TimeGrid {
  std::size_t pre_steps = 0;
  double pre_dt = 0.0;
  std::size_t window_steps = 0;
  double window_dt = 0.0;
  double checkpoint_time = 0.0;
  bool checkpoint = false;

  std::size_t total() const { return pre_steps + window_steps; }
  double time(std::size_t k) const {
    if (k <= pre_steps) return static_cast<double>(k) * pre_dt;
    return checkpoint_time + static_cast<double>(k - pre_steps) * window_dt;
  }
  double dt(std::size_t k) const { return k < pre_steps ? pre_dt : window_dt; }
};

class NoiseSource {
 public:
  explicit NoiseSource(const Driver& driver) {
    if (const auto* s = std::get_if<StableDriverSpec>(&driver)) stable_ = *s;
  }

  void draw(Stream& stream, double dt, std::span<double> out) const {
    if (stable_) {
      const double factor = stable_->scale * std::pow(dt, 1.0 / stable_->alpha_stable);
      for (double& v : out) v = factor * standard_stable(stream, stable_->alpha_stable);
    } else {
      const double sd = std::sqrt(dt);
      for (double& v : out) v = sd * stream.normal();
    }
  }

 private:
  std::optional<StableDriverSpec> stable_;
};

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_nondegenerate(const CoefficientSpec& c, std::span<const double> sigma,
                         std::size_t path, std::size_t step) {
  const double det = gram_determinant(sigma, c.dim_state, c.dim_noise);
  if (det < *c.nondegeneracy_floor) {
    std::ostringstream msg;
    msg << "det(sigma sigma^T) = " << det << " below declared floor "
        << *c.nondegeneracy_floor << " on path " << path << " at step " << step;
    throw SimulationError(msg.str());
  }
}

struct PathOutputs {
  std::span<double> endpoint;
  std::span<double> checkpoint;
  std::span<double> noise;
  std::span<double> frozen_drift;
  std::span<double> frozen_diffusion;
};

/// Scratch owned by one worker chunk.
struct PathScratch {
  std::vector<double> states;
  std::vector<double> drift;
  std::vector<double> sigma;
  std::vector<double> dnoise;
};

void simulate_path(const ModelSpec& model, const TimeGrid& grid, const NoiseSource& noise,
                   Stream stream, std::size_t path, PathScratch& s, const PathOutputs& out) {
  const auto& c = model.coefficients;
  const std::size_t d = c.dim_state;
  const std::size_t dn = c.dim_noise;
  const bool history = !c.markov;
  s.states.assign(history ? (grid.total() + 1) * d : d, 0.0);
  std::copy(model.x0.begin(), model.x0.end(), s.states.begin());

  for (std::size_t k = 0; k < grid.total(); ++k) {
    const std::size_t cur = history ? k : 0;
    const double time = grid.time(k);
    const PathView view(time, std::span<const double>(s.states).first((cur + 1) * d), d);
    c.drift(view, s.drift);
    c.diffusion(view, s.sigma);
    if (!all_finite(s.drift) || !all_finite(s.sigma)) {
      std::ostringstream msg;
      msg << "non-finite coefficient on path " << path << " at step " << k << " (t = " << time
          << ")";
      throw SimulationError(msg.str());
    }
    if (c.nondegeneracy_floor && (k % 16 == 0 || k == grid.pre_steps))
      check_nondegenerate(c, s.sigma, path, k);

    const bool in_window = grid.checkpoint && k >= grid.pre_steps;
    if (grid.checkpoint && k == grid.pre_steps) {
      const auto x = view.current();
      std::copy(x.begin(), x.end(), out.checkpoint.begin());
      std::copy(s.drift.begin(), s.drift.end(), out.frozen_drift.begin());
      std::copy(s.sigma.begin(), s.sigma.end(), out.frozen_diffusion.begin());
    }
    noise.draw(stream, grid.dt(k), s.dnoise);
    if (in_window) {
      std::copy(s.dnoise.begin(), s.dnoise.end(),
                out.noise.begin() + static_cast<std::ptrdiff_t>((k - grid.pre_steps) * dn));
    }
    const std::size_t next = history ? k + 1 : 0;
    auto x_next = std::span<double>(s.states).subspan(next * d, d);
    if (history) std::copy_n(s.states.begin() + static_cast<std::ptrdiff_t>(cur * d), d, x_next.begin());
    euler_update(x_next, s.drift, grid.dt(k), s.sigma, s.dnoise);
  }
  const std::size_t last = history ? grid.total() : 0;
  std::copy_n(s.states.begin() + static_cast<std::ptrdiff_t>(last * d), d, out.endpoint.begin());
}

PathEnsemble run(const ModelSpec& model, const TimeGrid& grid, double t, double epsilon,
                 std::size_t n_paths, SeedSpec seed, std::size_t workers) {
  const auto& c = model.coefficients;
  const std::size_t d = c.dim_state;
  const std::size_t dn = c.dim_noise;
  PathEnsemble ens;
  ens.t = t;
  ens.epsilon = epsilon;
  ens.n_steps = grid.total();
  ens.window_steps = grid.window_steps;
  ens.dim_noise = dn;
  ens.endpoints = Matrix(n_paths, d);
  if (grid.checkpoint) {
    ens.checkpoints = Matrix(n_paths, d);
    ens.retained_noise = Matrix(n_paths, grid.window_steps * dn);
    ens.frozen_drift = Matrix(n_paths, d);
    ens.frozen_diffusion = Matrix(n_paths, d * dn);
  }
  const NoiseSource noise(model.driver);
  parallel_chunks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
    PathScratch scratch;
    scratch.drift.resize(d);
    scratch.sigma.resize(d * dn);
    scratch.dnoise.resize(dn);
    for (std::size_t i = begin; i < end; ++i) {
      PathOutputs out{ens.endpoints.row(i), {}, {}, {}, {}};
      if (grid.checkpoint) {
        out.checkpoint = ens.checkpoints->row(i);
        out.noise = ens.retained_noise->row(i);
        out.frozen_drift = ens.frozen_drift->row(i);
        out.frozen_diffusion = ens.frozen_diffusion->row(i);
      }
      const SeedSpec path_seed{seed.master_seed, seed.stream_id + i};
      simulate_path(model, grid, noise, Stream(path_seed), i, scratch, out);
    }
  });
  return ens;
}

}  // namespace

PathEnsemble simulate_ensemble(const ModelSpec& model, double t, std::size_t n_steps,
                               std::size_t n_paths, SeedSpec seed, std::size_t workers) {
  model.validate();
  if (!(t > 0.0)) throw ParameterError("horizon t must be positive");
  if (n_steps < 1) throw ParameterError("n_steps must be at least 1");
  TimeGrid grid;
  grid.pre_steps = n_steps;
  grid.pre_dt = t / static_cast<double>(n_steps);
  return run(model, grid, t, 0.0, n_paths, seed, workers);
}

PathEnsemble simulate_with_checkpoint(const ModelSpec& model, double t, double epsilon,
                                      std::size_t n_steps, std::size_t n_paths,
                                      SeedSpec seed, const CheckpointOptions& options) {
  model.validate();
  if (!(t > 0.0)) throw ParameterError("horizon t must be positive");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(epsilon < t)) throw ParameterError("epsilon must be smaller than t");
  if (n_steps < 1) throw ParameterError("n_steps must be at least 1");
  std::size_t window = options.window_steps;
  if (window == 0) {
    window = static_cast<std::size_t>(std::lround(static_cast<double>(n_steps) * epsilon / t));
    window = std::max<std::size_t>(window, 1);
  }
  TimeGrid grid;
  grid.checkpoint = true;
  grid.window_steps = window;
  grid.pre_steps = n_steps > window ? n_steps - window : 1;
  grid.checkpoint_time = t - epsilon;
  grid.pre_dt = grid.checkpoint_time / static_cast<double>(grid.pre_steps);
  grid.window_dt = epsilon / static_cast<double>(window);
  return run(model, grid, t, epsilon, n_paths, seed, options.workers);
}

StateVec reintegrate_window(const ModelSpec& model, const PathEnsemble& ens, std::size_t index) {
  if (!ens.checkpoints || !ens.retained_noise)
    throw StateError("ensemble has no checkpoint or retained noise");
  if (!model.coefficients.markov)
    throw StateError("window re-integration needs Markov coefficients");
  if (index >= ens.size()) throw ParameterError("path index out of range");
  const auto& c = model.coefficients;
  const std::size_t d = c.dim_state;
  const std::size_t dn = c.dim_noise;
  const auto ck = ens.checkpoints->row(index);
  StateVec x(ck.begin(), ck.end());
  std::vector<double> drift(d), sigma(d * dn);
  const double dt = ens.window_dt();
  const double t0 = ens.t - ens.epsilon;
  const auto noise = ens.retained_noise->row(index);
  for (std::size_t k = 0; k < ens.window_steps; ++k) {
    const PathView view(t0 + static_cast<double>(k) * dt, x, d);
    c.drift(view, drift);
    c.diffusion(view, sigma);
    euler_update(x, drift, dt, sigma, noise.subspan(k * dn, dn));
  }
  return x;
}

void write_ensemble_csv(const PathEnsemble& ens, std::ostream& out) {
  const std::size_t d = ens.dim();
  out << "path_id";
  for (std::size_t j = 1; j <= d; ++j) out << ",x_" << j;
  if (ens.checkpoints)
    for (std::size_t j = 1; j <= d; ++j) out << ",c_" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    out << i;
    for (double v : ens.endpoints.row(i)) out << ',' << v;
    if (ens.checkpoints)
      for (double v : ens.checkpoints->row(i)) out << ',' << v;
    out << '\n';
  }
}

void write_ensemble_csv(const PathEnsemble& ens, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open " + path + " for writing");
  write_ensemble_csv(ens, file);
  if (!file) throw IoError("write failed for " + path);
}

PathEnsemble read_ensemble_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(file, line)) throw IoError(path + ": missing header row");
  std::size_t nx = 0, nc = 0;
  {
    std::stringstream header(line);
    std::string col;
    std::getline(header, col, ',');
    if (col != "path_id") throw IoError(path + ": first column must be path_id");
    while (std::getline(header, col, ',')) {
      if (col.rfind("x_", 0) == 0) ++nx;
      else if (col.rfind("c_", 0) == 0) ++nc;
      else throw IoError(path + ": unexpected column " + col);
    }
  }
  if (nx == 0 || (nc != 0 && nc != nx)) throw IoError(path + ": malformed header");
  std::vector<double> xs, cs;
  std::size_t rows = 0;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    for (std::size_t j = 0; j < nx + nc; ++j) {
      if (!std::getline(row, cell, ','))
        throw IoError(path + ": short row " + std::to_string(rows + 1));
      (j < nx ? xs : cs).push_back(std::stod(cell));
    }
    ++rows;
  }
  PathEnsemble ens;
  ens.endpoints = Matrix(rows, nx);
  std::copy(xs.begin(), xs.end(), ens.endpoints.data().begin());
  if (nc) {
    ens.checkpoints = Matrix(rows, nc);
    std::copy(cs.begin(), cs.end(), ens.checkpoints->data().begin());
  }
  return ens;
}

}  // namespace besovlab
