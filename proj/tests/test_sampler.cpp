#include "doctest.h"

#include <chrono>
#include <cmath>
#include <map>

#include "ipdsaw/errors.hpp"
#include "ipdsaw/model.hpp"
#include "ipdsaw/sampler.hpp"
#include "ipdsaw/stats.hpp"
#include "ipdsaw/walk.hpp"

using namespace ipdsaw;
using namespace ipdsaw::sampler;

namespace {

const ModelParams& crit() { return model::critical_params(); }

// Chi-square of keyed counts against a keyed law over the law's support.
template <class Key>
stats::TestResult chi_square_keyed(const std::map<Key, std::uint64_t>& counts,
                                   const std::map<Key, double>& law) {
  std::vector<std::uint64_t> obs;
  std::vector<double> probs;
  for (const auto& [k, p] : law) {
    const auto it = counts.find(k);
    obs.push_back(it == counts.end() ? 0 : it->second);
    probs.push_back(p);
  }
  for (const auto& [k, c] : counts) {
    if (!law.count(k)) {
      obs.push_back(c);
      probs.push_back(0.0);  // chi_square throws on this, which is what we want
    }
  }
  return stats::chi_square(obs, probs);
}

template <class Key>
double tv_keyed(const std::map<Key, std::uint64_t>& counts, const std::map<Key, double>& law,
                std::size_t n) {
  double tv = 0.0;
  for (const auto& [k, p] : law) {
    const auto it = counts.find(k);
    tv += std::abs((it == counts.end() ? 0.0 : static_cast<double>(it->second) / n) - p);
  }
  for (const auto& [k, c] : counts) {
    if (!law.count(k)) tv += static_cast<double>(c) / n;
  }
  return tv / 2.0;
}

template <class Key>
std::map<Key, double> keyed(const TrajectoryLaw& law) {
  std::map<Key, double> out;
  for (std::size_t i = 0; i < law.trajectories.size(); ++i) out[law.trajectories[i]] += law.probabilities[i];
  return out;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("default budget") {
  CHECK(default_budget(1000) == 200 * 100);
  CHECK(default_budget(1001) == 200 * 101);
  CHECK(default_budget(60000) == 200 * 1533);
}

TEST_CASE("accepted paths satisfy both conditions") {
  Rng rng(1);
  for (std::int64_t L : {1, 2, 3, 5, 17, 100, 1000, 5000}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto s = sample_critical_walk(L, crit(), rng, default_budget(L));
      const walk::AreaClock k(s.walk);
      CHECK(s.walk.values.size() == s.xi + 2);
      CHECK(k[s.xi] == L);
      CHECK(s.walk[s.xi + 1] == 0);
      CHECK(s.attempts >= 1);
      // max k with V_{xi-k+1} = ... = V_{xi+1} = 0, straight from the definition
      std::int64_t y = 0;
      for (std::int64_t k = 1; k <= static_cast<std::int64_t>(s.xi) + 1; ++k) {
        bool zeros = true;
        for (std::int64_t i = static_cast<std::int64_t>(s.xi) - k + 1; i <= static_cast<std::int64_t>(s.xi) + 1; ++i) {
          zeros = zeros && s.walk[static_cast<std::size_t>(i)] == 0;
        }
        if (zeros) y = k;
      }
      CHECK(terminal_zero_run(s) == y);
    }
  }
}

TEST_CASE("critical walk sampler refuses other couplings and bad budgets") {
  Rng rng(2);
  CHECK_THROWS_AS(sample_critical_walk(10, model::make_params(1.0), rng, 100), DomainError);
  CHECK_THROWS(sample_critical_walk(10, crit(), rng, 0));
}

TEST_CASE("budget exhaustion carries the attempt count") {
  Rng rng(3);
  try {
    sample_critical_walk(60000, crit(), rng, 1);
    // a first-attempt hit is possible in principle but not with this seed
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(e.attempts() == 1);
  }
}

TEST_CASE("determinism") {
  Rng a(9, 4), b(9, 4);
  const auto x = sample_critical_walk(3000, crit(), a, default_budget(3000));
  const auto y = sample_critical_walk(3000, crit(), b, default_budget(3000));
  CHECK(x.walk.values == y.walk.values);
  CHECK(x.attempts == y.attempts);
}

TEST_CASE("L = 6 walk law matches enumeration") {
  const auto law = keyed<std::vector<std::int64_t>>(conditioned_walk_law_exact(6, crit()));
  std::map<std::vector<std::int64_t>, std::uint64_t> counts;
  Rng rng(5);
  for (int i = 0; i < 100'000; ++i) ++counts[sample_critical_walk(6, crit(), rng, 10000).walk.values];
  CHECK(chi_square_keyed(counts, law).p_value > 0.001);
}

TEST_CASE("L = 60000 within the default budget") {
  Rng rng(1);
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = sample_critical_polymer(60000, rng, default_budget(60000));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(s.config.total_length() == 60000);
  MESSAGE("L = 60000: " << s.attempts << " attempts, " << secs << " s");
}

TEST_CASE("polymer samples lie in Omega_L") {
  Rng rng(6);
  for (std::int64_t L = 1; L < 300; L += 7) {
    const auto s = sample_critical_polymer(L, rng, default_budget(L));
    CHECK(s.config.total_length() == L);
    CHECK(s.config.size() >= 1);
  }
}

TEST_CASE("L = 6 polymer law matches enumeration at the critical point") {
  const auto exact = model::exact_polymer_law(6, model::critical_beta());
  std::map<model::StretchConfig, double> law;
  for (std::size_t i = 0; i < exact.configs.size(); ++i) law[exact.configs[i]] = exact.probabilities[i];
  std::map<model::StretchConfig, std::uint64_t> counts;
  Rng rng(7);
  for (int i = 0; i < 100'000; ++i) ++counts[sample_critical_polymer(6, rng, 10000).config];
  CHECK(chi_square_keyed(counts, law).p_value > 0.001);
}

TEST_CASE("L = 20 extension law matches the dynamic programme") {
  const auto dp = model::partition_dp(20, model::critical_beta());
  std::vector<std::uint64_t> counts(dp.extension_law.size(), 0);
  Rng rng(8);
  for (int i = 0; i < 100'000; ++i) ++counts[sample_critical_polymer(20, rng, 100000).config.size()];
  CHECK(stats::chi_square(counts, dp.extension_law).p_value > 0.001);
}

TEST_CASE("enumerated laws: polymer law equals the walk image for L <= 8") {
  for (std::int64_t L = 1; L <= 8; ++L) {
    const auto walk_law = conditioned_walk_law_exact(L, crit());
    double total = 0.0;
    for (double p : walk_law.probabilities) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    const auto polymer = model::exact_polymer_law(L, model::critical_beta());
    CHECK(total_variation(polymer, pushforward_polymer(walk_law)) < 1e-12);

    // marginal of xi_L against the dynamic programme
    const auto dp = model::partition_dp(L, model::critical_beta());
    std::vector<double> xi(dp.extension_law.size(), 0.0);
    for (std::size_t i = 0; i < walk_law.trajectories.size(); ++i) {
      xi[walk_law.trajectories[i].size() - 2] += walk_law.probabilities[i];
    }
    for (std::size_t n = 0; n < xi.size(); ++n) CHECK(std::abs(xi[n] - dp.extension_law[n]) <= 1e-10);
  }
}

TEST_CASE("enumerated walk law respects the cap") {
  CHECK_THROWS_AS(conditioned_walk_law_exact(12, crit(), 50), SizeError);
}

TEST_CASE("renewal-conditioned samples hit L") {
  Rng rng(10);
  const Steppers st(crit());
  for (auto start : {StartLaw::zero, StartLaw::mu}) {
    for (std::int64_t L : {3, 6, 50, 400}) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto r = sample_renewal_conditioned(L, st, start, rng, 1'000'000);
        const auto d = walk::decompose_excursions(r.walk);
        CHECK(d.partial_sums.back() == L);
        CHECK(d.partial_sums[d.nu(L)] == L);
        CHECK_FALSE(d.open.has_value());
      }
    }
  }
}

TEST_CASE("renewal acceptance decays like L^{-2/3}") {
  Rng rng(11);
  const Steppers st(crit());
  std::vector<double> lx, ly;
  for (std::int64_t L : {64, 256, 1024}) {
    const int reps = 3000;
    double attempts = 0.0;
    for (int i = 0; i < reps; ++i) {
      attempts += static_cast<double>(
          sample_renewal_conditioned(L, st, StartLaw::zero, rng, 10'000'000).attempts);
    }
    lx.push_back(std::log(static_cast<double>(L)));
    ly.push_back(std::log(reps / attempts));  // acceptance frequency
  }
  const double slope = (ly[2] - ly[0]) / (lx[2] - lx[0]);
  MESSAGE("acceptance slope " << slope);
  CHECK(slope == doctest::Approx(-2.0 / 3.0).epsilon(0.15 / (2.0 / 3.0)));
}

TEST_CASE("L = 6 renewal law matches enumeration") {
  for (auto start : {StartLaw::zero, StartLaw::mu}) {
    const auto law = keyed<std::vector<std::int64_t>>(renewal_law_exact(6, crit(), start));
    std::map<std::vector<std::int64_t>, std::uint64_t> counts;
    Rng rng(12);
    const Steppers st(crit());
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) ++counts[sample_renewal_conditioned(6, st, start, rng, 100000).walk.values];
    const double tv = tv_keyed(counts, law, n);
    MESSAGE("renewal TV " << tv << " over " << law.size() << " trajectories");
    CHECK(tv < 0.01);
  }
}

TEST_CASE("area-conditioned excursions") {
  Rng rng(13);
  CHECK(min_excursion_weight(StartLaw::zero) == 3);
  CHECK(min_excursion_weight(StartLaw::mu) == 1);
  for (std::int64_t N : {3, 4, 7, 20, 100}) {
    const auto e = sample_excursion_area(N, crit(), StartLaw::zero, rng, 10'000'000);
    CHECK(e.record.weight() == N);
    CHECK(walk::decompose_excursions(e.walk).weights.front() == N);
    CHECK_NOTHROW(walk::validate_excursion(e.record));
  }
  CHECK_THROWS_AS(sample_excursion_area(1, crit(), StartLaw::zero, rng, 1000), DomainError);
  CHECK_THROWS_AS(sample_excursion_area(2, crit(), StartLaw::zero, rng, 1000), DomainError);
}

TEST_CASE("N = 4 excursion law matches enumeration") {
  const auto law = keyed<std::vector<std::int64_t>>(excursion_law_exact(4, crit(), StartLaw::zero));
  std::map<std::vector<std::int64_t>, std::uint64_t> counts;
  Rng rng(14);
  const Steppers st(crit());
  const std::size_t n = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) ++counts[sample_excursion_area(4, st, StartLaw::zero, rng, 100000).walk.values];
  CHECK(tv_keyed(counts, law, n) < 0.01);
}

TEST_CASE("excursion chain matches the renewal gaps") {
  Rng rng(15);
  const std::vector<std::int64_t> s{0, 4, 9, 12};
  const auto chain = sample_excursion_chain(s, crit(), StartLaw::mu, rng, 10'000'000);
  REQUIRE(chain.records.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(chain.records[j].weight() == s[j + 1] - s[j]);
  CHECK(chain.records[0].end() == chain.records[1].start());
  CHECK(chain.records[1].end() == chain.records[2].start());
  const std::vector<std::int64_t> bad{0, 5, 5};
  CHECK_THROWS_AS(sample_excursion_chain(bad, crit(), StartLaw::mu, rng, 10), ValidationError);
}

TEST_CASE("terminal zero run is a nonnegative integer") {
  Rng rng(16);
  for (int i = 0; i < 200; ++i) CHECK(terminal_zero_run(sample_critical_walk(500, crit(), rng, default_budget(500))) >= 0);
}

TEST_CASE("attempt cost grows like L^{2/3}") {
  std::vector<double> lx, ly;
  for (std::int64_t L : {1000, 10000, 100000}) {
    const int reps = L == 100000 ? 60 : 400;
    double total = 0.0;
    Rng rng(17, static_cast<std::uint64_t>(L));
    for (int i = 0; i < reps; ++i) total += static_cast<double>(sample_critical_walk(L, crit(), rng, 50 * default_budget(L)).attempts);
    lx.push_back(std::log(static_cast<double>(L)));
    ly.push_back(std::log(total / reps));
  }
  // least squares over the three points
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  MESSAGE("attempt slope " << slope);
  CHECK(std::abs(slope - 2.0 / 3.0) <= 0.15);
}

}  // TEST_SUITE
