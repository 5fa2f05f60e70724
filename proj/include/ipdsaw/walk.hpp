#pragma once

// The auxiliary walk V: increment laws, the area clock K and its
// pseudo-inverse, the center-of-mass walk, excursions and reconstruction.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ipdsaw/model.hpp"
#include "ipdsaw/rng.hpp"

namespace ipdsaw::walk {

using model::ModelParams;

enum class IncrementLaw { laplace, mu };
enum class StartLaw { zero, mu };

struct WalkPath {
  std::vector<std::int64_t> values;  // V_0, ..., V_n
  StartLaw start_law = StartLaw::zero;

  WalkPath() = default;
  /// Throws ValidationError when start_law is zero and V_0 != 0.
  WalkPath(std::vector<std::int64_t> v, StartLaw law);

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  std::int64_t operator[](std::size_t i) const { return values[i]; }
};

/// laplace: e^{-beta|k|/2} / c;  mu: (1-x) at 0, (1-x)/2 x^|k| otherwise.
double increment_pmf(const ModelParams& params, std::int64_t k, IncrementLaw law);

/// Table-driven sampler for either increment law. One 64-bit draw per call
/// except in the far tail (beyond the table), which falls back to inversion.
class IncrementSampler {
 public:
  IncrementSampler(const ModelParams& params, IncrementLaw law);

  std::int64_t operator()(Rng& rng) const {
    const std::uint64_t bits = rng.next_u64();
    const std::int64_t sign = (bits & 1U) ? 1 : -1;
    // Top 12 bits of u select a guide bucket; most buckets map to one value.
    const std::uint8_t g = guide_[bits >> 52];
    if (g != kAmbiguous) return sign * g;
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return sign * invert(u, rng);
  }

  IncrementLaw law() const { return law_; }

 private:
  static constexpr std::uint8_t kAmbiguous = 255;

  // |U| for a uniform u by scanning the cdf table, then the geometric tail.
  std::int64_t invert(double u, Rng& rng) const;
  std::int64_t tail(Rng& rng) const;

  IncrementLaw law_;
  double ratio_;
  std::vector<double> cdf_;  // P(|U| <= m), m < table size
  std::array<std::uint8_t, 4096> guide_{};
};

/// One increment; convenience wrapper that rebuilds the table on each call.
std::int64_t sample_step(const ModelParams& params, IncrementLaw law, Rng& rng);

/// Walk of n steps started from 0 (zero) or from a mu-distributed value.
WalkPath simulate_walk(const ModelParams& params, StartLaw start, std::size_t n, Rng& rng);

/// K_0 = 0, K_n = n + sum_{i=1}^n |V_i|, with xi_s the first index where K >= s.
class AreaClock {
 public:
  explicit AreaClock(const WalkPath& v);
  explicit AreaClock(std::span<const std::int64_t> v);

  const std::vector<std::int64_t>& K() const { return k_; }
  std::int64_t operator[](std::size_t i) const { return k_[i]; }

  /// First index i with K_i >= s. Throws RangeError if s > K_n.
  std::size_t xi(double s) const;
  std::size_t xi(std::int64_t s) const;

 private:
  std::vector<std::int64_t> k_;
};

/// M_0 = 0, M_i = sum_{j<=i} (-1)^{j+1} (V_j - V_{j-1}) / 2.
std::vector<double> center_of_mass(std::span<const std::int64_t> v);

/// Closed form sum_{j<i} (-1)^{j-1} V_j + (-1)^{i-1} V_i / 2 (so -V_0/2 at i = 0).
/// Equals center_of_mass minus V_0 / 2 everywhere; identical when V_0 = 0.
std::vector<double> center_of_mass_alternating(std::span<const std::int64_t> v);

/// M_{l,i} = l_1 + ... + l_{i-1} + l_i / 2, with M_{l,0} = 0.
std::vector<double> center_of_mass(const model::StretchConfig& l);

struct OpenExcursion {
  std::size_t start = 0;  // tau of the last completed excursion
  std::int64_t length = 0;
  std::int64_t area = 0;
  std::int64_t weight() const { return length + area; }
};

struct ExcursionDecomposition {
  std::vector<std::size_t> taus;           // tau_0 = 0, tau_1, ..., tau_n
  std::vector<std::int64_t> lengths;       // N_k, k = 1..n
  std::vector<std::int64_t> areas;         // A_k = sum_{tau_{k-1} < i <= tau_k} |V_i|
  std::vector<std::int64_t> weights;       // X_k = N_k + A_k
  std::vector<std::int64_t> partial_sums;  // S_0 = 0, S_1, ..., S_n
  std::optional<OpenExcursion> open;       // trailing incomplete excursion

  std::size_t count() const { return lengths.size(); }
  /// nu_L = max{i >= 0 : S_i <= L}.
  std::size_t nu(std::int64_t L) const;
  /// L in the renewal set {S_n}.
  bool contains(std::int64_t L) const;
  /// Index of the excursion containing time index i >= 1 (1-based; count()+1 for the open tail).
  std::size_t excursion_of(std::size_t i) const;
};

ExcursionDecomposition decompose_excursions(std::span<const std::int64_t> v);
inline ExcursionDecomposition decompose_excursions(const WalkPath& v) {
  return decompose_excursions(std::span<const std::int64_t>(v.values));
}

/// |V_0|, ..., |V_tau| of a single excursion, with tau = size() - 1.
struct ModulusExcursion {
  std::vector<std::int64_t> moduli;

  std::size_t length() const { return moduli.size() - 1; }
  std::int64_t area() const;
  std::int64_t weight() const { return static_cast<std::int64_t>(length()) + area(); }
  std::int64_t start() const { return moduli.front(); }
  std::int64_t end() const { return moduli.back(); }
};

/// Throws ValidationError unless the moduli describe exactly one excursion.
void validate_excursion(const ModulusExcursion& e);

/// Concatenates excursion blocks (V_0..V_{tau-1} of each record) and appends
/// the terminal value of the last record. signs[j] is the Bernoulli sign used
/// when block j starts at 0 (and always for block 0).
WalkPath reconstruct_unconditioned(std::span<const ModulusExcursion> excursions,
                                   std::span<const int> signs, StartLaw start_law);

/// As above, but checks that excursion j has weight S_{j+1} - S_j and that
/// consecutive records meet: end of record j == start of record j + 1.
/// `renewal` is S_0 = 0 < S_1 < ... < S_n.
WalkPath reconstruct_conditioned(std::span<const std::int64_t> renewal,
                                 std::span<const ModulusExcursion> excursions,
                                 std::span<const int> signs, StartLaw start_law);

}  // namespace ipdsaw::walk
