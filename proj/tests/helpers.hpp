#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ipdsaw/model.hpp"
#include "ipdsaw/rng.hpp"
#include "ipdsaw/walk.hpp"

namespace testing {

inline std::int64_t uniform_int(ipdsaw::Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

/// Integer walk with V_0 = 0 and increments uniform in [-spread, spread].
inline std::vector<std::int64_t> random_walk(ipdsaw::Rng& rng, std::size_t n, std::int64_t spread = 3) {
  std::vector<std::int64_t> v{0};
  for (std::size_t i = 0; i < n; ++i) v.push_back(v.back() + uniform_int(rng, -spread, spread));
  return v;
}

/// Walk from the model's own increment law.
inline ipdsaw::walk::WalkPath model_walk(ipdsaw::Rng& rng, std::size_t n, double beta = 1.0) {
  return ipdsaw::walk::simulate_walk(ipdsaw::model::make_params(beta), ipdsaw::walk::StartLaw::zero, n, rng);
}

/// Random stretch configuration with N stretches of modulus at most `spread`.
inline ipdsaw::model::StretchConfig random_config(ipdsaw::Rng& rng, std::size_t n, std::int64_t spread = 4) {
  std::vector<std::int64_t> l;
  for (std::size_t i = 0; i < n; ++i) l.push_back(uniform_int(rng, -spread, spread));
  return ipdsaw::model::StretchConfig(std::move(l));
}

}  // namespace testing
