#pragma once

// Limit objects: Brownian paths on a grid, the geometric-area clock and its
// inverse, the conditioned pair (B, D) stopped at a_1, the Bessel-bridge
// profile and the truncation outside small excursions.

#include <cstdint>
#include <utility>
#include <vector>

#include "ipdsaw/rng.hpp"

namespace ipdsaw::continuum {

/// Samples at t_k = k dt, except that the last sample may sit at end_time
/// inside the final cell. Linear between samples.
struct GridPath {
  double dt = 0.0;
  std::vector<double> values;
  double variance_rate = 1.0;
  double end_time = 0.0;

  double time(std::size_t k) const;
  /// Linear interpolation; throws RangeError outside [0, end_time].
  double operator()(double t) const;
  double max_abs() const;
};

/// Increments N(0, sigma2 dt); horizon rounded up to a whole number of steps.
GridPath simulate_bm(double sigma2, double dt, double horizon, Rng& rng);

/// A(t) = int_0^t |B|, by the trapezoid rule on the samples of B and linear
/// between them, so that its inverse is exact on that piecewise-linear A.
class AreaProcess {
 public:
  explicit AreaProcess(const GridPath& b);

  const std::vector<double>& values() const { return area_; }
  double total() const { return area_.back(); }
  double operator()(double t) const;
  /// a(s) = inf{t : A(t) >= s}; throws RangeError for s > total().
  double inverse(double s) const;

 private:
  std::vector<double> times_;
  std::vector<double> area_;
};

enum class Conditioning {
  last_zero,  // rescale the path before its last zero (exact in law, no epsilon bias)
  epsilon,    // accept iff |B(a_1)| <= epsilon
};

struct LimitSettings {
  double sigma2 = 1.0;    // variance rate of B
  double d_sigma2 = 0.25; // variance rate of D
  double dt = 1e-4;
  double epsilon = 0.02;
  Conditioning method = Conditioning::last_zero;
  std::uint64_t budget = 100000;
};

struct LimitSample {
  GridPath B;  // ends at a1
  GridPath D;  // same grid as B
  std::vector<double> area;
  double a1 = 0.0;
  double epsilon = 0.0;
  std::uint64_t attempts = 0;

  /// B~(s) = B(a_s) and D~(s) = D(a_s) for s in [0, 1].
  double B_tilde(double s) const;
  double D_tilde(double s) const;
  double a(double s) const;
};

/// B conditioned on B(a_1) = 0, with an independent D on [0, a_1].
LimitSample sample_conditioned_limit(const LimitSettings& settings, Rng& rng);

/// Squared Bessel bridge of dimension 4/3 by an Euler scheme with reflection,
/// mapped to Y = ((3/2) rho)^{2/3}. Y_0 = Y_1 = 0.
GridPath sample_Y_bessel(double dt, Rng& rng);

/// Band {(x, y) : x in [0, a1], D_x - |B_x|/2 <= y <= D_x + |B_x|/2} as a closed
/// polygon (upper boundary left to right, then the lower one back).
struct BandPolygon {
  std::vector<std::pair<double, double>> vertices;
  double area() const;
  double x_min() const;
  double x_max() const;
};
BandPolygon build_S_crit(const LimitSample& sample);

/// Processes on the area grid s_j = j / m: B~, D~ and their truncations keeping
/// only excursions of B with area >= 1/k.
struct TruncatedLimit {
  std::vector<double> s;
  std::vector<double> B, Bk, D, Dk;
  std::vector<std::pair<double, double>> kept;  // excursion intervals in real time
};
TruncatedLimit truncate_continuum(const LimitSample& sample, std::int64_t k, std::size_t m = 2000);

/// Real-time excursion intervals of B between consecutive zeros, with their areas.
struct Excursion {
  double start = 0.0;
  double end = 0.0;
  double area = 0.0;
};
std::vector<Excursion> excursions_of(const LimitSample& sample);

}  // namespace ipdsaw::continuum
