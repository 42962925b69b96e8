#include "besovlab/drivers.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "besovlab/error.hpp"

namespace besovlab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

Stream::Stream(SeedSpec seed) : seed_(seed) {
  key_ = {static_cast<std::uint32_t>(seed.master_seed),
          static_cast<std::uint32_t>(seed.master_seed >> 32)};
}

std::uint64_t Stream::next_u64() {
  if (position_ >= 4) {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(seed_.stream_id),
        static_cast<std::uint32_t>(seed_.stream_id >> 32)};
    buffer_ = philox4x32(counter, key_);
    ++block_;
    position_ = 0;
  }
  const std::uint64_t lo = buffer_[position_];
  const std::uint64_t hi = buffer_[position_ + 1];
  position_ += 2;
  return lo | (hi << 32);
}

double Stream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Stream::exponential() { return -std::log(uniform()); }

void StableDriverSpec::validate(bool require_levy_regime) const {
  if (!(alpha_stable > 0.0 && alpha_stable <= 2.0))
    throw ParameterError("stable index must lie in (0,2], got " + std::to_string(alpha_stable));
  if (!(scale > 0.0)) throw ParameterError("stable scale must be positive");
  if (require_levy_regime && !(alpha_stable > 1.0))
    throw ParameterError("Levy scenarios require stable index > 1, got " +
                         std::to_string(alpha_stable));
}

Matrix gaussian_increments(Stream& stream, std::size_t n, std::size_t dim, double dt) {
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  Matrix out(n, dim);
  const double sd = std::sqrt(dt);
  for (double& v : out.data()) v = sd * stream.normal();
  return out;
}

double standard_stable(Stream& stream, double alpha) {
  const double v = std::numbers::pi * (stream.uniform() - 0.5);
  const double w = stream.exponential();
  if (alpha == 2.0) return 2.0 * std::sin(v) * std::sqrt(w);
  if (alpha == 1.0) return std::tan(v);
  const double cv = std::cos(v);
  return std::sin(alpha * v) / std::pow(cv, 1.0 / alpha) *
         std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

std::vector<double> stable_increments(Stream& stream, std::size_t n,
                                      const StableDriverSpec& spec, double dt) {
  spec.validate();
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  const double factor = spec.scale * std::pow(dt, 1.0 / spec.alpha_stable);
  std::vector<double> out(n);
  for (double& v : out) v = factor * standard_stable(stream, spec.alpha_stable);
  return out;
}

}  // namespace besovlab
