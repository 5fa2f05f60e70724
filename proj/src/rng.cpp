#include "ipdsaw/rng.hpp"

#include <cmath>

namespace ipdsaw {

std::uint64_t Rng::derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  // Two rounds so that neighbouring (seed, stream) pairs land far apart.
  const std::uint64_t a = mix(seed + 0x6A09E667F3BCC909ULL);
  return mix(a ^ mix(stream * kWeyl + 0xBB67AE8584CAA73BULL));
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_(derive_key(seed, stream)) {}

double Rng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_ = true;
  return u * f;
}

}  // namespace ipdsaw
