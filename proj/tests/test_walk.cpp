#include "doctest.h"

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "ipdsaw/errors.hpp"
#include "ipdsaw/model.hpp"
#include "ipdsaw/sampler.hpp"
#include "ipdsaw/stats.hpp"
#include "ipdsaw/walk.hpp"

using namespace ipdsaw;
using namespace ipdsaw::walk;

namespace {

const ModelParams& half() {
  static const auto p = model::make_params(2.0 * std::log(2.0));
  return p;
}

// Counts of increments on -K..K plus one cell on each side for the tails.
void check_increment_law(const ModelParams& p, IncrementLaw law, std::uint64_t seed) {
  const int K = 20;
  std::vector<std::uint64_t> counts(2 * K + 3, 0);
  std::vector<double> probs(2 * K + 3, 0.0);
  for (int k = -K; k <= K; ++k) probs[k + K + 1] = increment_pmf(p, k, law);
  double inner = 0.0;
  for (double q : probs) inner += q;
  probs.front() = probs.back() = (1.0 - inner) / 2.0;

  const IncrementSampler draw(p, law);
  Rng rng(seed);
  const std::size_t n = 1'000'000;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = draw(rng);
    sum += static_cast<double>(k);
    if (k < -K) ++counts.front();
    else if (k > K) ++counts.back();
    else ++counts[k + K + 1];
  }
  const auto r = stats::chi_square(counts, probs);
  CHECK(r.p_value > 0.001);
  double var = 0.0;
  for (int k = -200; k <= 200; ++k) var += increment_pmf(p, k, law) * k * k;
  CHECK(std::abs(sum / n) < 4.0 * std::sqrt(var / n));
}

std::vector<std::int64_t> moduli_of(std::span<const std::int64_t> v, std::size_t a, std::size_t b) {
  std::vector<std::int64_t> m;
  for (std::size_t i = a; i <= b; ++i) m.push_back(std::abs(v[i]));
  return m;
}

// First excursion in modulus of a fresh walk. No rejection: an excursion still
// open after max_steps is closed by a jump to 0, which only alters values past
// that index.
ModulusExcursion first_excursion(const sampler::Steppers& st, StartLaw start, Rng& rng,
                                 std::size_t max_steps = 400) {
  std::int64_t cur = start == StartLaw::mu ? st.start(rng) : 0;
  ModulusExcursion e{{std::abs(cur)}};
  for (;;) {
    const std::int64_t prev = cur;
    cur += st.step(rng);
    const bool crossed = prev != 0 && (prev > 0 ? cur <= 0 : cur >= 0);
    if (!crossed && cur != 0 && e.moduli.size() > max_steps) {
      e.moduli.push_back(std::abs(cur));
      e.moduli.push_back(0);
      return e;
    }
    e.moduli.push_back(std::abs(cur));
    if (crossed) return e;
  }
}

}  // namespace

TEST_SUITE("walk") {

TEST_CASE("increment pmf hand values") {
  CHECK(increment_pmf(half(), 0, IncrementLaw::laplace) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(increment_pmf(half(), 0, IncrementLaw::mu) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(increment_pmf(half(), 2, IncrementLaw::mu) == doctest::Approx(0.25 * 0.25).epsilon(1e-14));
  for (auto law : {IncrementLaw::laplace, IncrementLaw::mu}) {
    for (double beta : {0.2, 1.0, 4.0}) {
      const auto p = model::make_params(beta);
      double total = 0.0;
      for (int k = -5000; k <= 5000; ++k) total += increment_pmf(p, k, law);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("increment sampler matches the pmf") {
  check_increment_law(model::critical_params(), IncrementLaw::laplace, 1);
  check_increment_law(model::critical_params(), IncrementLaw::mu, 2);
  check_increment_law(model::make_params(0.15), IncrementLaw::laplace, 3);  // long tail past the table
  check_increment_law(model::make_params(6.0), IncrementLaw::laplace, 4);
}

TEST_CASE("sample_step agrees with the table sampler and is deterministic") {
  const auto& p = model::critical_params();
  Rng a(5), b(5), c(5);
  const IncrementSampler draw(p, IncrementLaw::laplace);
  for (int i = 0; i < 1000; ++i) {
    const auto x = sample_step(p, IncrementLaw::laplace, a);
    CHECK(x == sample_step(p, IncrementLaw::laplace, b));
    CHECK(x == draw(c));
  }
}

TEST_CASE("walk start laws") {
  Rng rng(3);
  const auto v = simulate_walk(model::critical_params(), StartLaw::zero, 50, rng);
  CHECK(v.values.size() == 51);
  CHECK(v[0] == 0);
  CHECK_THROWS_AS(WalkPath({1, 2}, StartLaw::zero), ValidationError);
  CHECK_NOTHROW(WalkPath({1, 2}, StartLaw::mu));
}

TEST_CASE("area clock") {
  const std::vector<std::int64_t> v{0, 2, 1, -1};
  const AreaClock k(v);
  CHECK(k.K() == std::vector<std::int64_t>{0, 3, 5, 7});
  CHECK(k.xi(std::int64_t{5}) == 2);
  CHECK(k.xi(std::int64_t{6}) == 3);
  CHECK(k.xi(std::int64_t{0}) == 0);
  CHECK(k.xi(4.5) == 2);
  CHECK_THROWS_AS(k.xi(std::int64_t{8}), RangeError);
}

TEST_CASE("area clock never charges V_0") {
  const std::vector<std::int64_t> v{5, 1};
  CHECK(AreaClock(v).K() == std::vector<std::int64_t>{0, 2});
}

TEST_CASE("area clock is strictly increasing") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const auto v = testing::random_walk(rng, 300);
    const AreaClock k(v);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(k[i] - k[i - 1] == 1 + std::abs(v[i]));
  }
}

TEST_CASE("center of mass examples") {
  const std::vector<std::int64_t> v{0, 1, -1, 2};
  CHECK(center_of_mass(v)[3] == 3.0);
  const std::vector<std::int64_t> flat(10, 4);
  for (double m : center_of_mass(flat)) CHECK(m == 0.0);
}

TEST_CASE("center of mass: increment and alternating forms agree exactly") {
  Rng rng(21);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(testing::uniform_int(rng, 0, 10000));
    const auto v = testing::random_walk(rng, n, 1 + rep % 9);
    CHECK(center_of_mass(v) == center_of_mass_alternating(v));
  }
}

TEST_CASE("center of mass: walk and polymer forms agree exactly") {
  Rng rng(22);
  for (int rep = 0; rep < 300; ++rep) {
    auto v = testing::random_walk(rng, 1 + rep % 400);
    const std::size_t n = v.size() - 1;
    const auto l = model::from_walk(v, n);
    const auto mw = center_of_mass(v);
    const auto ml = center_of_mass(l);
    REQUIRE(ml.size() == n + 1);
    for (std::size_t i = 0; i <= n; ++i) CHECK(mw[i] == ml[i]);
  }
}

TEST_CASE("excursion decomposition examples") {
  const std::vector<std::int64_t> v{0, 2, 1, -1, -3, 2};
  const auto d = decompose_excursions(v);
  CHECK(d.taus == std::vector<std::size_t>{0, 3, 5});
  CHECK(d.lengths == std::vector<std::int64_t>{3, 2});
  CHECK(d.areas == std::vector<std::int64_t>{4, 5});
  CHECK(d.weights == std::vector<std::int64_t>{7, 7});
  CHECK(d.partial_sums == std::vector<std::int64_t>{0, 7, 14});
  CHECK_FALSE(d.open.has_value());
  CHECK(d.contains(14));
  CHECK_FALSE(d.contains(10));
  CHECK(d.nu(13) == 1);
  CHECK(d.nu(14) == 2);

  const std::vector<std::int64_t> w{0, 0, 3, -1};
  CHECK(decompose_excursions(w).taus == std::vector<std::size_t>{0, 3});
}

TEST_CASE("excursion decomposition: invariants on random walks") {
  Rng rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    const auto v = testing::random_walk(rng, 1 + rep * 7, 1 + rep % 4);
    const auto d = decompose_excursions(v);
    const AreaClock k(v);
    for (std::size_t j = 0; j < d.taus.size(); ++j) CHECK(d.partial_sums[j] == k[d.taus[j]]);

    std::vector<std::int64_t> neg(v);
    for (auto& x : neg) x = -x;
    const auto e = decompose_excursions(neg);
    CHECK(e.taus == d.taus);
    CHECK(e.lengths == d.lengths);
    CHECK(e.areas == d.areas);
    CHECK(e.weights == d.weights);
  }
}

TEST_CASE("P(X_1 = 3) = 2 p^2 and the small-n pmf") {
  for (double beta : {1.0, model::critical_beta(), 2.0}) {
    const auto prm = model::make_params(beta);
    const double p = increment_pmf(prm, 1, IncrementLaw::laplace);
    const auto pmf = sampler::excursion_weight_pmf(6, prm, StartLaw::zero);
    CHECK(pmf[0] == 0.0);
    CHECK(pmf[1] == 0.0);
    CHECK(pmf[2] == 0.0);
    CHECK(pmf[3] == doctest::Approx(2.0 * p * p).epsilon(1e-12));
  }
}

TEST_CASE("empirical P(X_1 = n) for n <= 6 within 3 standard errors") {
  const auto& prm = model::critical_params();
  const auto pmf = sampler::excursion_weight_pmf(6, prm, StartLaw::zero);
  const sampler::Steppers steppers(prm);
  Rng rng(41);
  const std::size_t n = 400'000;
  std::vector<std::size_t> hits(7, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = sampler::sample_first_excursion(steppers, StartLaw::zero, 6, rng);
    if (e.weight) ++hits[static_cast<std::size_t>(*e.weight)];
  }
  for (std::size_t k = 0; k <= 6; ++k) {
    const double est = static_cast<double>(hits[k]) / n;
    const double se = std::sqrt(std::max(pmf[k] * (1 - pmf[k]), 1e-12) / n);
    CHECK(std::abs(est - pmf[k]) <= 3.0 * se);
  }
}

TEST_CASE("unconditioned reconstruction inverts the decomposition") {
  const sampler::Steppers st(model::critical_params());
  Rng rng(51);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<ModulusExcursion> ex;
    std::vector<int> signs;
    const int blocks = 1 + rep % 6;
    for (int j = 0; j < blocks; ++j) {
      // Under the reconstruction rule each block after the first starts where
      // the previous one ended, so chain the records through their end value.
      auto e = first_excursion(st, j == 0 ? StartLaw::zero : StartLaw::mu, rng);
      if (j > 0) e.moduli.front() = ex.back().end();
      ex.push_back(e);
      signs.push_back(rng.sign());
    }
    bool valid = true;
    for (const auto& e : ex) {
      try {
        validate_excursion(e);
      } catch (const ValidationError&) {
        valid = false;
      }
    }
    if (!valid) continue;
    const auto w = reconstruct_unconditioned(ex, signs, StartLaw::zero);
    const auto d = decompose_excursions(w);
    REQUIRE(d.count() == ex.size());
    for (std::size_t j = 0; j < ex.size(); ++j) {
      CHECK(moduli_of(w.values, d.taus[j], d.taus[j + 1]) == ex[j].moduli);
    }

    std::vector<int> flipped(signs);
    for (auto& s : flipped) s = -s;
    const auto u = reconstruct_unconditioned(ex, flipped, StartLaw::zero);
    REQUIRE(u.values.size() == w.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(std::abs(u[i]) == std::abs(w[i]));
  }
}

TEST_CASE("unconditioned reconstruction: empty input") {
  CHECK_THROWS_AS(reconstruct_unconditioned({}, {}, StartLaw::mu), ValidationError);
}

TEST_CASE("unconditioned reconstruction reproduces the law of V_5") {
  const auto& p = model::critical_params();
  const std::size_t n = 100'000;
  std::vector<double> direct, rebuilt;
  Rng a(61), b(62);
  const sampler::Steppers st(p);
  for (std::size_t i = 0; i < n; ++i) {
    direct.push_back(static_cast<double>(simulate_walk(p, StartLaw::mu, 5, a)[5]));
    std::vector<ModulusExcursion> ex;
    std::vector<int> signs;
    std::size_t covered = 0;
    while (covered < 5) {
      ex.push_back(first_excursion(st, StartLaw::mu, b));
      signs.push_back(b.sign());
      covered += ex.back().length();
    }
    rebuilt.push_back(static_cast<double>(reconstruct_unconditioned(ex, signs, StartLaw::mu)[5]));
  }
  const auto r = stats::ks_two_sample(direct, rebuilt);
  CHECK(r.p_value > 0.001);
}

TEST_CASE("conditioned reconstruction: renewal set preserved") {
  const auto& p = model::critical_params();
  Rng rng(71);
  const sampler::Steppers st(p);
  for (int rep = 0; rep < 100; ++rep) {
    const std::int64_t L = 10 + rep;
    const auto r = sampler::sample_renewal_conditioned(L, st, StartLaw::mu, rng, 1'000'000);
    const auto s = decompose_excursions(r.walk).partial_sums;
    const auto chain = sampler::sample_excursion_chain(s, st, StartLaw::mu, rng, 10'000'000);
    std::vector<int> signs;
    for (std::size_t j = 0; j < chain.records.size(); ++j) signs.push_back(rng.sign());
    const auto w = reconstruct_conditioned(s, chain.records, signs, StartLaw::mu);
    const auto d = decompose_excursions(w);
    CHECK(d.partial_sums == s);
    CHECK(d.contains(L));
  }
}

TEST_CASE("conditioned reconstruction: single excursion and mismatches") {
  const auto& p = model::critical_params();
  Rng rng(72);
  const auto e = sampler::sample_excursion_area(9, p, StartLaw::zero, rng, 1'000'000);
  const std::vector<std::int64_t> s{0, 9};
  const std::vector<ModulusExcursion> one{e.record};
  const std::vector<int> sign{1};
  const auto w = reconstruct_conditioned(s, one, sign, StartLaw::zero);
  const auto d = decompose_excursions(w);
  CHECK(d.count() == 1);
  CHECK(d.weights[0] == 9);

  const std::vector<std::int64_t> wrong{0, 10};
  CHECK_THROWS_AS(reconstruct_conditioned(wrong, one, sign, StartLaw::zero), ValidationError);
}

TEST_CASE("conditioned reconstruction at L = 6 matches enumeration") {
  const auto& p = model::critical_params();
  const auto exact = sampler::renewal_law_exact(6, p, StartLaw::mu);
  std::map<std::vector<std::int64_t>, double> target;
  for (std::size_t i = 0; i < exact.trajectories.size(); ++i) {
    target[exact.trajectories[i]] += exact.probabilities[i];
  }

  const std::size_t n = 1'000'000;
  std::map<std::vector<std::int64_t>, std::size_t> counts;
  Rng rng(81);
  const sampler::Steppers st(p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = sampler::sample_renewal_conditioned(6, st, StartLaw::mu, rng, 1'000'000);
    const auto s = decompose_excursions(r.walk).partial_sums;
    const auto chain = sampler::sample_excursion_chain(s, st, StartLaw::mu, rng, 1'000'000);
    std::vector<int> signs;
    for (std::size_t j = 0; j < chain.records.size(); ++j) signs.push_back(rng.sign());
    ++counts[reconstruct_conditioned(s, chain.records, signs, StartLaw::mu).values];
  }
  double tv = 0.0;
  for (const auto& [traj, q] : target) {
    const auto it = counts.find(traj);
    const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) / n;
    tv += std::abs(f - q);
  }
  for (const auto& [traj, c] : counts) {
    if (!target.count(traj)) tv += static_cast<double>(c) / n;
  }
  tv /= 2.0;
  MESSAGE("TV at L = 6: " << tv << " over " << target.size() << " trajectories");
  CHECK(tv < 0.01);
}

}  // TEST_SUITE
