#pragma once

// Rescaled cadlag processes built from a walk or a polymer: the hat (real
// time) and tilde (area time) versions, truncation outside large excursions,
// interpolation and uniform distances.

#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "ipdsaw/model.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw::rescaling {

enum class Continuity { right, left };

/// Piecewise constant function with jumps only at multiples of 1/rate.
/// values[k] = f(k / rate); past the last grid point f keeps its last value.
struct StepFunction {
  double rate = 1.0;
  std::vector<double> values;
  Continuity continuity = Continuity::right;
  double domain_end = 1.0;  // may be +infinity

  /// Throws RangeError outside [0, domain_end].
  double operator()(double s) const;
  /// Value on the open cell (k / rate, (k + 1) / rate).
  double cell_value(std::size_t k) const;
  double max_jump() const;
};

/// Linear interpolation of grid values, constant after the last grid point.
struct PolygonalFunction {
  double rate = 1.0;
  std::vector<double> values;
  double domain_end = 1.0;

  double operator()(double s) const;
};

using Function = std::variant<StepFunction, PolygonalFunction>;

enum class Variant { hat, tilde, polymer, truncated };

struct ScaledProcessPair {
  StepFunction profile;
  StepFunction com;
  Variant variant = Variant::hat;
};

/// Center-of-mass sequence used by every rescaled process (the closed form,
/// which starts at -V_0/2).
std::vector<double> com_sequence(std::span<const std::int64_t> v);

/// hat: s -> L^{-1/3} V_{floor(s L^{2/3}) ^ xi_L} on [0, inf), right-continuous.
/// tilde: s -> L^{-1/3} V_{xi_{sL}} on [0, 1], left-continuous with rate L.
/// Throws ValidationError for the polymer and truncated variants (see the
/// dedicated functions) and RangeError when K never reaches L.
ScaledProcessPair rescale_processes(const walk::WalkPath& v, std::int64_t L, Variant variant);

/// (|l|, M_l) at s -> index floor(s L^{2/3}) ^ N_l, with l_0 = 0 and M_{l,0} = 0.
ScaledProcessPair rescale_polymer(const model::StretchConfig& l);

/// Truncation outside excursions with X < L/k (tested as k X < L). Time
/// indices tau_{t-1}..tau_t - 1 belong to excursion t; the final index of a
/// path ending on a renewal belongs to the last excursion, and indices in an
/// open trailing excursion use its partial weight.
ScaledProcessPair truncate_discrete(const walk::WalkPath& v, std::int64_t L, std::int64_t k);

/// Maximal residuals of the two exact time-change relations between the hat
/// and tilde processes: hat(j / L^{2/3}) = tilde(K_{j ^ xi_L} / L) for the
/// profile and the center of mass.
struct TimeChangeResidual {
  double profile = 0.0;
  double com = 0.0;
};
TimeChangeResidual time_change_residual(const walk::WalkPath& v, std::int64_t L);

/// Largest |n - sum_{j <= K_n} 1/(1 + |V_{xi_j}|)| over n <= xi_L, summing one
/// term per hop of xi.
double hopping_sum_residual(const walk::WalkPath& v, std::int64_t L);

PolygonalFunction interpolate(const StepFunction& f);

/// Number of terms kept in the metric on [0, inf).
inline constexpr int kMetricTerms = 40;

/// sup |f - g| on [0, T] when both domains end at the same finite T, and the
/// series sum_k 2^{-k} min(1, sup_{[0,k]} |f - g|) (k <= kMetricTerms) when both
/// are unbounded. Throws DomainError on mismatched domains.
double sup_distance(const Function& f, const Function& g);

/// sup |f - g| on [0, T] (exact, from breakpoints and one-sided limits).
double sup_on(const Function& f, const Function& g, double T);

}  // namespace ipdsaw::rescaling
