#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "besovlab/matrix.hpp"

namespace besovlab {

/// Identifies one random stream: the master seed selects the Philox key and
/// the stream id occupies the upper half of the counter, so streams with
/// different ids never share a counter value.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  bool operator==(const SeedSpec&) const = default;
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The variate sequence is a pure function of
/// the SeedSpec: copying a fresh Stream replays it bit for bit.
///
/// Normals use the polar-free Box–Muller transform on two open-interval
/// uniforms, emitting the cosine branch first and the sine branch second.
/// This choice is frozen; golden tests depend on it.
class Stream {
 public:
  explicit Stream(SeedSpec seed);

  const SeedSpec& seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  double normal();
  double exponential();

 private:
  SeedSpec seed_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int position_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Stream make_stream(SeedSpec seed) { return Stream(seed); }

/// Symmetric alpha-stable law, characteristic function exp(-(scale |u|)^alpha).
struct StableDriverSpec {
  double alpha_stable = 2.0;
  double scale = 1.0;

  /// Throws ParameterError unless alpha in (0,2] and scale > 0; with
  /// `require_levy_regime` additionally demands alpha > 1.
  void validate(bool require_levy_regime = false) const;
};

/// n rows of i.i.d. N(0, dt I_dim).
Matrix gaussian_increments(Stream& stream, std::size_t n, std::size_t dim, double dt);

/// One standard symmetric stable variate (unit scale) by Chambers–Mallows–Stuck.
double standard_stable(Stream& stream, double alpha);

/// n i.i.d. symmetric stable increments over a time step dt, i.e. standard
/// variates scaled by scale * dt^(1/alpha).
std::vector<double> stable_increments(Stream& stream, std::size_t n,
                                      const StableDriverSpec& spec, double dt);

}  // namespace besovlab
