#include "ipdsaw/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::walk {

namespace {
constexpr std::size_t kTableSize = 64;
}

WalkPath::WalkPath(std::vector<std::int64_t> v, StartLaw law)
    : values(std::move(v)), start_law(law) {
  if (values.empty()) throw ValidationError("WalkPath: empty");
  if (law == StartLaw::zero && values[0] != 0) {
    throw ValidationError("WalkPath: zero start law requires V_0 = 0");
  }
}

double increment_pmf(const ModelParams& params, std::int64_t k, IncrementLaw law) {
  const double x = params.ratio();
  const auto m = static_cast<double>(std::abs(k));
  if (law == IncrementLaw::laplace) return std::pow(x, m) / params.c_beta;
  if (k == 0) return 1.0 - x;
  return 0.5 * (1.0 - x) * std::pow(x, m);
}

IncrementSampler::IncrementSampler(const ModelParams& params, IncrementLaw law)
    : law_(law), ratio_(params.ratio()) {
  if (!(params.beta > 0.0)) throw DomainError("IncrementSampler: beta must be positive");
  cdf_.resize(kTableSize);
  double acc = 0.0;
  for (std::size_t m = 0; m < kTableSize; ++m) {
    const double p = increment_pmf(params, static_cast<std::int64_t>(m), law);
    acc += m == 0 ? p : 2.0 * p;
    cdf_[m] = acc;
  }
  // Bucket b holds u in [b, b + 1) / 4096 on the 2^-53 grid; it is resolved
  // when both ends invert to the same table value.
  for (std::size_t b = 0; b < guide_.size(); ++b) {
    const double lo = static_cast<double>(b) / 4096.0;
    const double hi = static_cast<double>(b + 1) / 4096.0 - 0x1.0p-53;
    auto scan = [&](double u) -> std::int64_t {
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      return it == cdf_.end() ? -1 : static_cast<std::int64_t>(it - cdf_.begin());
    };
    const auto a = scan(lo), z = scan(hi);
    guide_[b] = (a >= 0 && a == z && a < kAmbiguous) ? static_cast<std::uint8_t>(a) : kAmbiguous;
  }
}

std::int64_t IncrementSampler::invert(double u, Rng& rng) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it != cdf_.end()) return static_cast<std::int64_t>(it - cdf_.begin());
  return tail(rng);
}

std::int64_t IncrementSampler::tail(Rng& rng) const {
  // |U| given |U| >= T is T plus a geometric(1 - x) variable.
  const double g = std::floor(std::log(rng.uniform_open()) / std::log(ratio_));
  return static_cast<std::int64_t>(kTableSize) + static_cast<std::int64_t>(g);
}

std::int64_t sample_step(const ModelParams& params, IncrementLaw law, Rng& rng) {
  return IncrementSampler(params, law)(rng);
}

WalkPath simulate_walk(const ModelParams& params, StartLaw start, std::size_t n, Rng& rng) {
  const IncrementSampler step(params, IncrementLaw::laplace);
  std::vector<std::int64_t> v(n + 1);
  v[0] = start == StartLaw::mu ? IncrementSampler(params, IncrementLaw::mu)(rng) : 0;
  for (std::size_t i = 1; i <= n; ++i) v[i] = v[i - 1] + step(rng);
  return WalkPath(std::move(v), start);
}

// --- area clock -------------------------------------------------------------

AreaClock::AreaClock(const WalkPath& v) : AreaClock(std::span<const std::int64_t>(v.values)) {}

AreaClock::AreaClock(std::span<const std::int64_t> v) {
  if (v.empty()) throw ValidationError("AreaClock: empty walk");
  k_.resize(v.size());
  k_[0] = 0;
  for (std::size_t i = 1; i < v.size(); ++i) k_[i] = k_[i - 1] + 1 + std::abs(v[i]);
}

std::size_t AreaClock::xi(std::int64_t s) const {
  if (s > k_.back()) {
    throw RangeError("AreaClock::xi: level " + std::to_string(s) + " beyond K_n = " +
                     std::to_string(k_.back()));
  }
  return static_cast<std::size_t>(std::lower_bound(k_.begin(), k_.end(), s) - k_.begin());
}

std::size_t AreaClock::xi(double s) const {
  if (s > static_cast<double>(k_.back())) {
    throw RangeError("AreaClock::xi: level beyond K_n = " + std::to_string(k_.back()));
  }
  // K is integer valued, so K_i >= s iff K_i >= ceil(s).
  return xi(static_cast<std::int64_t>(std::ceil(s)));
}

// --- center of mass -----------------------------------------------------------

std::vector<double> center_of_mass(std::span<const std::int64_t> v) {
  std::vector<double> m(v.size(), 0.0);
  // Kept in half-units to stay exact.
  std::int64_t twice = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    const std::int64_t u = v[j] - v[j - 1];
    twice += (j % 2 == 1) ? u : -u;
    m[j] = static_cast<double>(twice) / 2.0;
  }
  return m;
}

std::vector<double> center_of_mass_alternating(std::span<const std::int64_t> v) {
  std::vector<double> m(v.size(), 0.0);
  if (v.empty()) return m;
  m[0] = static_cast<double>(-v[0]) / 2.0;
  std::int64_t prefix = 0;  // sum_{j<i} (-1)^{j-1} V_j
  for (std::size_t i = 1; i < v.size(); ++i) {
    const std::size_t j = i - 1;
    prefix += (j % 2 == 1) ? v[j] : -v[j];
    const std::int64_t tail = (i % 2 == 1) ? v[i] : -v[i];
    m[i] = static_cast<double>(2 * prefix + tail) / 2.0;
  }
  return m;
}

std::vector<double> center_of_mass(const model::StretchConfig& l) {
  std::vector<double> m(l.size() + 1, 0.0);
  std::int64_t prefix = 0;
  for (std::size_t i = 1; i <= l.size(); ++i) {
    m[i] = static_cast<double>(2 * prefix + l[i - 1]) / 2.0;
    prefix += l[i - 1];
  }
  return m;
}

// --- excursions ---------------------------------------------------------------

std::size_t ExcursionDecomposition::nu(std::int64_t L) const {
  auto it = std::upper_bound(partial_sums.begin(), partial_sums.end(), L);
  return static_cast<std::size_t>(it - partial_sums.begin()) - 1;
}

bool ExcursionDecomposition::contains(std::int64_t L) const {
  return std::binary_search(partial_sums.begin(), partial_sums.end(), L);
}

std::size_t ExcursionDecomposition::excursion_of(std::size_t i) const {
  // First k >= 1 with tau_k >= i.
  auto it = std::lower_bound(taus.begin() + 1, taus.end(), i);
  return static_cast<std::size_t>(it - taus.begin());
}

ExcursionDecomposition decompose_excursions(std::span<const std::int64_t> v) {
  ExcursionDecomposition d;
  d.taus.push_back(0);
  d.partial_sums.push_back(0);
  std::int64_t length = 0, area = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    ++length;
    area += std::abs(v[i]);
    const std::int64_t prev = v[i - 1];
    const bool ends = prev != 0 && ((prev > 0 && v[i] <= 0) || (prev < 0 && v[i] >= 0));
    if (ends) {
      d.taus.push_back(i);
      d.lengths.push_back(length);
      d.areas.push_back(area);
      d.weights.push_back(length + area);
      d.partial_sums.push_back(d.partial_sums.back() + length + area);
      length = area = 0;
    }
  }
  if (length > 0) d.open = OpenExcursion{d.taus.back(), length, area};
  return d;
}

std::int64_t ModulusExcursion::area() const {
  std::int64_t a = 0;
  for (std::size_t i = 1; i < moduli.size(); ++i) a += moduli[i];
  return a;
}

void validate_excursion(const ModulusExcursion& e) {
  const auto& m = e.moduli;
  if (m.size() < 2) throw ValidationError("excursion: needs at least one step");
  for (auto x : m) {
    if (x < 0) throw ValidationError("excursion: negative modulus");
  }
  const std::size_t tau = m.size() - 1;
  if (m[tau - 1] == 0) throw ValidationError("excursion: value before the end must be nonzero");
  for (std::size_t i = 1; i < tau; ++i) {
    if (m[i - 1] != 0 && m[i] == 0) {
      throw ValidationError("excursion: ends before its last index");
    }
  }
}

namespace {

// Shared assembly: blocks V_0..V_{tau-1} with the sign rule, then the terminal value.
WalkPath assemble(std::span<const ModulusExcursion> excursions, std::span<const int> signs,
                  StartLaw start_law) {
  if (excursions.empty()) throw ValidationError("reconstruct: empty excursion list");
  if (signs.size() < excursions.size()) {
    throw ValidationError("reconstruct: one Bernoulli sign per excursion required");
  }
  if (start_law == StartLaw::zero && excursions.front().start() != 0) {
    throw ValidationError("reconstruct: zero start law but first excursion starts away from 0");
  }
  std::vector<std::int64_t> v;
  std::int64_t last = 0;  // last nonzero value written
  for (std::size_t j = 0; j < excursions.size(); ++j) {
    const auto& m = excursions[j].moduli;
    validate_excursion(excursions[j]);
    if (signs[j] != 1 && signs[j] != -1) throw ValidationError("reconstruct: signs must be +1 or -1");
    int s;
    if (j == 0 || m[0] == 0) {
      s = signs[j];
    } else {
      s = last > 0 ? -1 : 1;
    }
    for (std::size_t i = 0; i + 1 < m.size(); ++i) v.push_back(s * m[i]);
    last = v.back();
  }
  const std::int64_t end = excursions.back().end();
  v.push_back(last > 0 ? -end : end);
  return WalkPath(std::move(v), start_law);
}

}  // namespace

WalkPath reconstruct_unconditioned(std::span<const ModulusExcursion> excursions,
                                   std::span<const int> signs, StartLaw start_law) {
  return assemble(excursions, signs, start_law);
}

WalkPath reconstruct_conditioned(std::span<const std::int64_t> renewal,
                                 std::span<const ModulusExcursion> excursions,
                                 std::span<const int> signs, StartLaw start_law) {
  if (renewal.size() != excursions.size() + 1 || renewal.empty() || renewal[0] != 0) {
    throw ValidationError("reconstruct_conditioned: renewal set must be S_0 = 0 plus one point per excursion");
  }
  for (std::size_t j = 0; j < excursions.size(); ++j) {
    const std::int64_t gap = renewal[j + 1] - renewal[j];
    if (excursions[j].weight() != gap) {
      throw ValidationError("reconstruct_conditioned: excursion " + std::to_string(j + 1) +
                            " has X = " + std::to_string(excursions[j].weight()) +
                            " but the renewal gap is " + std::to_string(gap));
    }
    if (j + 1 < excursions.size() && excursions[j].end() != excursions[j + 1].start()) {
      throw ValidationError("reconstruct_conditioned: excursions " + std::to_string(j + 1) +
                            " and " + std::to_string(j + 2) + " do not meet");
    }
  }
  return assemble(excursions, signs, start_law);
}

}  // namespace ipdsaw::walk
