#pragma once

// Exact rejection samplers for the critical polymer and for area-conditioned
// renewals and excursions, plus enumeration oracles for small sizes.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ipdsaw/model.hpp"
#include "ipdsaw/rng.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw::sampler {

using model::ModelParams;
using walk::ModulusExcursion;
using walk::StartLaw;
using walk::WalkPath;

/// 200 * ceil(L^{2/3}).
std::uint64_t default_budget(std::int64_t L);

/// Prebuilt increment tables for loops that draw many short walks.
struct Steppers {
  explicit Steppers(const ModelParams& p)
      : params(p), step(p, walk::IncrementLaw::laplace), start(p, walk::IncrementLaw::mu) {}
  ModelParams params;
  walk::IncrementSampler step;
  walk::IncrementSampler start;
};

struct CriticalSample {
  WalkPath walk;        // V_0, ..., V_{xi_L}, V_{xi_L + 1} = 0
  std::size_t xi = 0;   // xi_L = N_l
  std::uint64_t attempts = 0;
};

/// Law P_{beta_c}(. | V_{xi_L+1} = 0, K_{xi_L} = L) by global rejection.
/// Throws DomainError unless params.beta is the critical point.
CriticalSample sample_critical_walk(std::int64_t L, const ModelParams& params, Rng& rng,
                                    std::uint64_t budget);

struct PolymerSample {
  model::StretchConfig config;
  std::uint64_t attempts = 0;
};

/// T_{xi_L}(V) for V from sample_critical_walk at beta_c.
PolymerSample sample_critical_polymer(std::int64_t L, Rng& rng, std::uint64_t budget);

/// y_L = max{k >= 0 : V_{xi-k+1} = ... = V_{xi+1} = 0}.
std::int64_t terminal_zero_run(const CriticalSample& s);

struct RenewalSample {
  WalkPath walk;  // truncated at tau_{nu_L}
  std::uint64_t attempts = 0;
};

/// Law P(. | L in renewal set): excursions generated until some S_n = L.
RenewalSample sample_renewal_conditioned(std::int64_t L, const ModelParams& params, StartLaw start,
                                         Rng& rng, std::uint64_t budget);
RenewalSample sample_renewal_conditioned(std::int64_t L, const Steppers& steppers, StartLaw start,
                                         Rng& rng, std::uint64_t budget);

/// Smallest reachable X_1: 3 from a zero start, 1 from a mu start.
std::int64_t min_excursion_weight(StartLaw start);

struct ExcursionSample {
  WalkPath walk;  // V_0, ..., V_tau
  ModulusExcursion record;
  std::uint64_t attempts = 0;
};

/// First excursion conditioned on X_1 = target.
ExcursionSample sample_excursion_area(std::int64_t target, const ModelParams& params,
                                      StartLaw start, Rng& rng, std::uint64_t budget);
ExcursionSample sample_excursion_area(std::int64_t target, const Steppers& steppers,
                                      StartLaw start, Rng& rng, std::uint64_t budget);

/// First excursion of an unconditioned walk, abandoned once its running weight
/// exceeds `cap` (then weight is reported as nullopt).
struct FreeExcursion {
  std::optional<std::int64_t> weight;
  std::size_t steps = 0;
};
FreeExcursion sample_first_excursion(const Steppers& steppers, StartLaw start, std::int64_t cap,
                                     Rng& rng);

/// Renewal points S_1 < S_2 < ... that do not exceed `horizon` for a fresh walk.
std::vector<std::int64_t> renewal_points(const Steppers& steppers, StartLaw start,
                                         std::int64_t horizon, Rng& rng);

/// Modulus records whose weights are the gaps of `renewal` (S_0 = 0, ..., S_n),
/// from their joint law given the gaps: excursion j + 1 starts where excursion
/// j ended. Exact: a backward pass tabulates h_j(s) = P(gaps j.. are hit | start
/// modulus s), then each excursion is proposed freely and kept when its weight
/// matches, with probability h_{j+1}(end) / max h_{j+1}. `attempts` counts
/// proposals; the first start modulus is cut off where its mass is below 1e-30.
struct ExcursionChain {
  std::vector<ModulusExcursion> records;
  std::uint64_t attempts = 0;
};
ExcursionChain sample_excursion_chain(std::span<const std::int64_t> renewal,
                                      const ModelParams& params, StartLaw start, Rng& rng,
                                      std::uint64_t budget);
ExcursionChain sample_excursion_chain(std::span<const std::int64_t> renewal,
                                      const Steppers& steppers, StartLaw start, Rng& rng,
                                      std::uint64_t budget);

// --- enumeration oracles ------------------------------------------------------

/// Finite law over integer trajectories.
struct TrajectoryLaw {
  std::vector<std::vector<std::int64_t>> trajectories;
  std::vector<double> probabilities;
  double event_mass = 0.0;  // unconditional probability of the conditioning event
};

/// P_beta(. | V_{xi_L+1} = 0, K_{xi_L} = L); trajectories run to V_{xi_L+1}.
TrajectoryLaw conditioned_walk_law_exact(std::int64_t L, const ModelParams& params,
                                         std::uint64_t cap = model::kDefaultEnumerationCap);

/// Law of T_{xi_L}(V) under a conditioned walk law, keyed by configuration.
std::map<model::StretchConfig, double> pushforward_polymer(const TrajectoryLaw& law);

/// Total variation between the enumerated polymer law and a keyed law.
double total_variation(const model::PolymerLaw& polymer,
                       const std::map<model::StretchConfig, double>& other);

/// P(. | X_1 = target) over first-excursion trajectories V_0..V_tau. Under the
/// mu start, |V_0| is truncated where the neglected mass drops below 1e-15.
TrajectoryLaw excursion_law_exact(std::int64_t target, const ModelParams& params, StartLaw start);

/// P(X_1 = n) for n = 0..n_max.
std::vector<double> excursion_weight_pmf(std::int64_t n_max, const ModelParams& params,
                                         StartLaw start);

/// P(. | L in renewal set), trajectories truncated at tau_{nu_L}.
TrajectoryLaw renewal_law_exact(std::int64_t L, const ModelParams& params, StartLaw start);

}  // namespace ipdsaw::sampler
