#include "ipdsaw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::sampler {

using walk::IncrementLaw;
using walk::IncrementSampler;

namespace {

bool crosses(std::int64_t prev, std::int64_t v) {
  return prev != 0 && ((prev > 0 && v <= 0) || (prev < 0 && v >= 0));
}

void require_positive_length(std::int64_t L, const char* who) {
  if (L < 1) throw DomainError(std::string(who) + ": length must be positive");
}

void require_budget(std::uint64_t budget, const char* who) {
  if (budget < 1) throw DomainError(std::string(who) + ": attempt budget must be >= 1");
}

std::int64_t draw_start(StartLaw start, const Steppers& steppers, Rng& rng) {
  return start == StartLaw::zero ? 0 : steppers.start(rng);
}

}  // namespace

std::uint64_t default_budget(std::int64_t L) {
  const double l23 = std::ceil(std::cbrt(static_cast<double>(std::max<std::int64_t>(L, 1))) *
                               std::cbrt(static_cast<double>(std::max<std::int64_t>(L, 1))));
  return 200U * static_cast<std::uint64_t>(l23);
}

CriticalSample sample_critical_walk(std::int64_t L, const ModelParams& params, Rng& rng,
                                    std::uint64_t budget) {
  require_positive_length(L, "sample_critical_walk");
  require_budget(budget, "sample_critical_walk");
  if (std::abs(params.beta - model::critical_beta()) > 1e-9) {
    throw DomainError("sample_critical_walk: only defined at the critical point");
  }
  const IncrementSampler step(params, IncrementLaw::laplace);
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    // Attempts run without storing the path; the accepted one is replayed
    // from its saved generator state, which yields the same increments.
    const Rng saved = rng;
    std::int64_t cur = 0, k = 0;
    while (k < L) {
      cur += step(rng);
      k += 1 + std::abs(cur);
    }
    if (k > L) continue;
    if (cur + step(rng) != 0) continue;
    Rng replay = saved;
    std::vector<std::int64_t> v{0};
    cur = 0;
    k = 0;
    while (k < L) {
      cur += step(replay);
      k += 1 + std::abs(cur);
      v.push_back(cur);
    }
    const std::size_t xi = v.size() - 1;
    v.push_back(0);
    return CriticalSample{WalkPath(std::move(v), StartLaw::zero), xi, attempt};
  }
  throw BudgetError("sample_critical_walk: no exact hit at L = " + std::to_string(L), budget);
}

PolymerSample sample_critical_polymer(std::int64_t L, Rng& rng, std::uint64_t budget) {
  const CriticalSample s = sample_critical_walk(L, model::critical_params(), rng, budget);
  return PolymerSample{model::from_walk(s.walk.values, s.xi), s.attempts};
}

std::int64_t terminal_zero_run(const CriticalSample& s) {
  std::int64_t y = 0;
  std::size_t i = s.xi;
  while (s.walk.values[i] == 0) {
    ++y;
    if (i == 0) break;
    --i;
  }
  return y;
}

RenewalSample sample_renewal_conditioned(std::int64_t L, const ModelParams& params, StartLaw start,
                                         Rng& rng, std::uint64_t budget) {
  return sample_renewal_conditioned(L, Steppers(params), start, rng, budget);
}

RenewalSample sample_renewal_conditioned(std::int64_t L, const Steppers& steppers, StartLaw start,
                                         Rng& rng, std::uint64_t budget) {
  require_positive_length(L, "sample_renewal_conditioned");
  require_budget(budget, "sample_renewal_conditioned");
  const IncrementSampler& step = steppers.step;
  std::vector<std::int64_t> v;
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    v.clear();
    std::int64_t cur = draw_start(start, steppers, rng), k = 0;
    v.push_back(cur);
    for (;;) {
      const std::int64_t prev = cur;
      cur += step(rng);
      k += 1 + std::abs(cur);
      v.push_back(cur);
      if (crosses(prev, cur) && k == L) {
        return RenewalSample{WalkPath(std::move(v), start), attempt};
      }
      if (k >= L) break;
    }
  }
  throw BudgetError("sample_renewal_conditioned: L = " + std::to_string(L) + " never renewed",
                    budget);
}

std::int64_t min_excursion_weight(StartLaw start) { return start == StartLaw::zero ? 3 : 1; }

namespace {

// One excursion from V_0 = v0; returns its weight or -1 once the weight exceeds cap.
std::int64_t run_excursion(std::int64_t v0, std::int64_t cap, const IncrementSampler& step,
                           Rng& rng, std::vector<std::int64_t>* out) {
  std::int64_t cur = v0, k = 0;
  if (out) {
    out->clear();
    out->push_back(cur);
  }
  for (;;) {
    const std::int64_t prev = cur;
    cur += step(rng);
    k += 1 + std::abs(cur);
    if (out) out->push_back(cur);
    if (crosses(prev, cur)) return k <= cap ? k : -1;
    if (k >= cap) return -1;
  }
}

ModulusExcursion moduli_of(const std::vector<std::int64_t>& v) {
  ModulusExcursion e;
  e.moduli.reserve(v.size());
  for (auto x : v) e.moduli.push_back(std::abs(x));
  return e;
}

}  // namespace

ExcursionSample sample_excursion_area(std::int64_t target, const ModelParams& params,
                                      StartLaw start, Rng& rng, std::uint64_t budget) {
  return sample_excursion_area(target, Steppers(params), start, rng, budget);
}

ExcursionSample sample_excursion_area(std::int64_t target, const Steppers& steppers,
                                      StartLaw start, Rng& rng, std::uint64_t budget) {
  require_budget(budget, "sample_excursion_area");
  if (target < min_excursion_weight(start)) {
    throw DomainError("sample_excursion_area: X = " + std::to_string(target) +
                      " is infeasible for this start law (minimum " +
                      std::to_string(min_excursion_weight(start)) + ")");
  }
  const IncrementSampler& step = steppers.step;
  std::vector<std::int64_t> v;
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    const std::int64_t v0 = draw_start(start, steppers, rng);
    // Weight exactly target: run with cap = target and require equality.
    const std::int64_t w = run_excursion(v0, target, step, rng, &v);
    if (w == target) {
      ModulusExcursion rec = moduli_of(v);
      return ExcursionSample{WalkPath(std::move(v), start), std::move(rec), attempt};
    }
  }
  throw BudgetError("sample_excursion_area: X = " + std::to_string(target) + " not hit", budget);
}

FreeExcursion sample_first_excursion(const Steppers& steppers, StartLaw start, std::int64_t cap,
                                     Rng& rng) {
  const IncrementSampler& step = steppers.step;
  std::int64_t cur = start == StartLaw::mu ? steppers.start(rng) : 0, k = 0;
  std::size_t n = 0;
  for (;;) {
    const std::int64_t prev = cur;
    cur += step(rng);
    k += 1 + std::abs(cur);
    ++n;
    if (crosses(prev, cur)) {
      if (k <= cap) return FreeExcursion{k, n};
      return FreeExcursion{std::nullopt, n};
    }
    if (k > cap) return FreeExcursion{std::nullopt, n};
  }
}

std::vector<std::int64_t> renewal_points(const Steppers& steppers, StartLaw start,
                                         std::int64_t horizon, Rng& rng) {
  const IncrementSampler& step = steppers.step;
  std::vector<std::int64_t> pts;
  std::int64_t cur = start == StartLaw::mu ? steppers.start(rng) : 0, k = 0;
  while (k < horizon) {
    const std::int64_t prev = cur;
    cur += step(rng);
    k += 1 + std::abs(cur);
    if (crosses(prev, cur) && k <= horizon) pts.push_back(k);
  }
  return pts;
}

ExcursionChain sample_excursion_chain(std::span<const std::int64_t> renewal,
                                      const ModelParams& params, StartLaw start, Rng& rng,
                                      std::uint64_t budget) {
  return sample_excursion_chain(renewal, Steppers(params), start, rng, budget);
}

namespace {

// F[s][r] = P(an excursion from modulus s crosses with interior weight r),
// interior meaning V_1..V_{tau-1}; row 0 is a start at zero.
std::vector<std::vector<double>> interior_weight_table(const ModelParams& params, std::size_t rows,
                                                       std::size_t cols) {
  const double x = params.ratio(), c = params.c_beta;
  auto pmf = [&](std::int64_t k) { return std::pow(x, static_cast<double>(std::abs(k))) / c; };
  std::vector<std::vector<double>> f(rows, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < cols; ++r) {
    for (std::size_t m = 0; m < rows; ++m) {
      double acc = 0.0;
      if (m == 0) {
        if (r >= 1) acc += pmf(0) * f[0][r - 1];
        for (std::size_t q = 1; q + 1 <= r; ++q) acc += 2.0 * pmf(static_cast<std::int64_t>(q)) * f[q][r - 1 - q];
      } else {
        if (r == 0) acc += std::pow(x, static_cast<double>(m)) / (c * (1.0 - x));  // P(U <= -m)
        for (std::size_t q = 1; q + 1 <= r; ++q) {
          acc += pmf(static_cast<std::int64_t>(q) - static_cast<std::int64_t>(m)) * f[q][r - 1 - q];
        }
      }
      f[m][r] = acc;
    }
  }
  return f;
}

}  // namespace

ExcursionChain sample_excursion_chain(std::span<const std::int64_t> renewal,
                                      const Steppers& steppers, StartLaw start, Rng& rng,
                                      std::uint64_t budget) {
  require_budget(budget, "sample_excursion_chain");
  if (renewal.size() < 2 || renewal[0] != 0) {
    throw ValidationError("sample_excursion_chain: renewal set must start at 0 and have a point");
  }
  for (std::size_t j = 1; j < renewal.size(); ++j) {
    if (renewal[j] <= renewal[j - 1]) {
      throw ValidationError("sample_excursion_chain: renewal points must increase");
    }
  }
  const std::size_t n = renewal.size() - 1;
  std::vector<std::int64_t> gap(n);
  std::int64_t gmax = 0;
  for (std::size_t j = 0; j < n; ++j) {
    gap[j] = renewal[j + 1] - renewal[j];
    gmax = std::max(gmax, gap[j]);
  }

  // Later starts are ends of earlier excursions, so below gmax; only the
  // first one needs a longer table, cut where x^s < 1e-30.
  const double x = steppers.params.ratio();
  const auto G = static_cast<std::size_t>(gmax);
  const std::size_t tail = static_cast<std::size_t>(std::ceil(std::log(1e-30) / std::log(x)));
  const std::size_t rows = start == StartLaw::zero ? G : G + tail;
  const auto f = interior_weight_table(steppers.params, std::max<std::size_t>(rows, 1), G);
  auto end_mass = [&](std::size_t e) { return (1.0 - x) * std::pow(x, static_cast<double>(e)); };

  // h[j][s], each row scaled to max 1; h[n] = 1.
  std::vector<std::vector<double>> h(n + 1, std::vector<double>(f.size(), 0.0));
  std::fill(h[n].begin(), h[n].end(), 1.0);
  for (std::size_t j = n; j-- > 0;) {
    const auto g = static_cast<std::size_t>(gap[j]);
    double top = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) {
      double acc = 0.0;
      for (std::size_t e = 0; e + 1 <= g && e < h[j + 1].size(); ++e) {
        acc += f[s][g - 1 - e] * end_mass(e) * h[j + 1][e];
      }
      h[j][s] = acc;
      top = std::max(top, acc);
    }
    if (!(top > 0.0)) throw DomainError("sample_excursion_chain: renewal gaps are infeasible");
    for (double& v : h[j]) v /= top;
  }

  std::int64_t s0 = 0;
  if (start == StartLaw::mu) {
    double total = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) total += end_mass(s) * h[0][s];
    double u = rng.uniform() * total;
    std::size_t s = 0;
    for (; s + 1 < f.size(); ++s) {
      const double w = end_mass(s) * h[0][s];
      if (u < w) break;
      u -= w;
    }
    s0 = static_cast<std::int64_t>(s);
  } else if (!(h[0][0] > 0.0)) {
    throw DomainError("sample_excursion_chain: renewal gaps are infeasible from a zero start");
  }

  ExcursionChain chain;
  chain.records.resize(n);
  std::vector<std::int64_t> v;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& next = h[j + 1];
    const auto reach = std::min<std::ptrdiff_t>(gap[j], static_cast<std::ptrdiff_t>(next.size()));
    const double top = *std::max_element(next.begin(), next.begin() + reach);
    for (;;) {
      if (++chain.attempts > budget) {
        throw BudgetError("sample_excursion_chain: renewal gaps not matched", budget);
      }
      if (run_excursion(s0, gap[j], steppers.step, rng, &v) != gap[j]) continue;
      const auto e = static_cast<std::size_t>(std::abs(v.back()));
      if (j + 1 == n || rng.uniform() * top < next[e]) break;
    }
    chain.records[j] = moduli_of(v);
    s0 = chain.records[j].end();
  }
  return chain;
}

// --- enumeration oracles ------------------------------------------------------

TrajectoryLaw conditioned_walk_law_exact(std::int64_t L, const ModelParams& params,
                                         std::uint64_t cap) {
  require_positive_length(L, "conditioned_walk_law_exact");
  const std::uint64_t n = model::count_configurations(L);
  if (n > cap) {
    throw SizeError("conditioned_walk_law_exact: " + std::to_string(n) +
                    " trajectories exceed the cap " + std::to_string(cap));
  }
  const double x = params.ratio();
  TrajectoryLaw law;
  law.trajectories.reserve(n);
  law.probabilities.reserve(n);
  // K_N = L with V_{N+1} = 0 is exactly the image of Omega_L under the inverse of T_N.
  model::for_each_configuration(L, [&](const std::vector<std::int64_t>& l) {
    auto v = model::to_walk(model::StretchConfig(l));
    std::int64_t jumps = 0;
    for (std::size_t i = 1; i < v.size(); ++i) jumps += std::abs(v[i] - v[i - 1]);
    const double p = std::pow(x, static_cast<double>(jumps)) /
                     std::pow(params.c_beta, static_cast<double>(v.size() - 1));
    law.trajectories.push_back(std::move(v));
    law.probabilities.push_back(p);
  });
  double total = 0.0;
  for (double p : law.probabilities) total += p;
  for (double& p : law.probabilities) p /= total;
  law.event_mass = total;
  return law;
}

std::map<model::StretchConfig, double> pushforward_polymer(const TrajectoryLaw& law) {
  std::map<model::StretchConfig, double> out;
  for (std::size_t i = 0; i < law.trajectories.size(); ++i) {
    const auto& v = law.trajectories[i];
    // The trajectory runs to V_{xi+1}, so N = size - 2.
    out[model::from_walk(v, v.size() - 2)] += law.probabilities[i];
  }
  return out;
}

double total_variation(const model::PolymerLaw& polymer,
                       const std::map<model::StretchConfig, double>& other) {
  double tv = 0.0;
  for (std::size_t i = 0; i < polymer.configs.size(); ++i) {
    auto it = other.find(polymer.configs[i]);
    const double q = it == other.end() ? 0.0 : it->second;
    tv += std::abs(polymer.probabilities[i] - q);
  }
  for (const auto& [cfg, q] : other) {
    if (!std::binary_search(polymer.configs.begin(), polymer.configs.end(), cfg,
                            [](const auto& a, const auto& b) {
                              if (a.size() != b.size()) return a.size() < b.size();
                              return a < b;
                            })) {
      tv += q;
    }
  }
  return 0.5 * tv;
}

namespace {

// Depth-first walk over trajectories whose running K stays within `budget`.
// `on_cross(k, prob)` is called at each sign-change time; it returns true to
// keep extending the trajectory past that time.
class TrajectoryEnumerator {
 public:
  TrajectoryEnumerator(const ModelParams& params, std::int64_t budget)
      : x_(params.ratio()), inv_c_(1.0 / params.c_beta), budget_(budget) {}

  template <class OnCross>
  void run(std::int64_t v0, double p0, OnCross&& on_cross) {
    path_.assign(1, v0);
    extend(0, p0, on_cross);
  }

  const std::vector<std::int64_t>& path() const { return path_; }

 private:
  template <class OnCross>
  void extend(std::int64_t k, double p, OnCross& on_cross) {
    const std::int64_t prev = path_.back();
    const std::int64_t room = budget_ - k - 1;
    for (std::int64_t v = -room; v <= room; ++v) {
      const std::int64_t k2 = k + 1 + std::abs(v);
      const double p2 = p * inv_c_ * std::pow(x_, static_cast<double>(std::abs(v - prev)));
      path_.push_back(v);
      bool more = true;
      if (crosses(prev, v)) more = on_cross(k2, p2);
      if (more && k2 < budget_) extend(k2, p2, on_cross);
      path_.pop_back();
    }
  }

  double x_;
  double inv_c_;
  std::int64_t budget_;
  std::vector<std::int64_t> path_;
};

// Values of V_0 to enumerate with their probabilities.
std::vector<std::pair<std::int64_t, double>> start_values(const ModelParams& params, StartLaw start) {
  if (start == StartLaw::zero) return {{0, 1.0}};
  const double x = params.ratio();
  const auto m_max = static_cast<std::int64_t>(std::ceil(std::log(1e-15) / std::log(x)));
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::int64_t m = -m_max; m <= m_max; ++m) {
    out.emplace_back(m, walk::increment_pmf(params, m, IncrementLaw::mu));
  }
  return out;
}

void normalize(TrajectoryLaw& law) {
  double total = 0.0;
  for (double p : law.probabilities) total += p;
  law.event_mass = total;
  if (total > 0.0) {
    for (double& p : law.probabilities) p /= total;
  }
}

}  // namespace

TrajectoryLaw excursion_law_exact(std::int64_t target, const ModelParams& params, StartLaw start) {
  if (target < 1) throw DomainError("excursion_law_exact: target must be positive");
  TrajectoryLaw law;
  TrajectoryEnumerator en(params, target);
  for (const auto& [v0, p0] : start_values(params, start)) {
    en.run(v0, p0, [&](std::int64_t k, double p) {
      if (k == target) {
        law.trajectories.push_back(en.path());
        law.probabilities.push_back(p);
      }
      return false;  // the first excursion ends here
    });
  }
  normalize(law);
  return law;
}

std::vector<double> excursion_weight_pmf(std::int64_t n_max, const ModelParams& params,
                                         StartLaw start) {
  std::vector<double> pmf(static_cast<std::size_t>(std::max<std::int64_t>(n_max, 0)) + 1, 0.0);
  TrajectoryEnumerator en(params, n_max);
  for (const auto& [v0, p0] : start_values(params, start)) {
    en.run(v0, p0, [&](std::int64_t k, double p) {
      pmf[static_cast<std::size_t>(k)] += p;
      return false;
    });
  }
  return pmf;
}

TrajectoryLaw renewal_law_exact(std::int64_t L, const ModelParams& params, StartLaw start) {
  require_positive_length(L, "renewal_law_exact");
  TrajectoryLaw law;
  TrajectoryEnumerator en(params, L);
  for (const auto& [v0, p0] : start_values(params, start)) {
    en.run(v0, p0, [&](std::int64_t k, double p) {
      if (k == L) {
        law.trajectories.push_back(en.path());
        law.probabilities.push_back(p);
        return false;
      }
      return true;
    });
  }
  normalize(law);
  return law;
}

}  // namespace ipdsaw::sampler
