#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "ipdsaw/errors.hpp"
#include "ipdsaw/rescaling.hpp"
#include "ipdsaw/sampler.hpp"
#include "ipdsaw/stats.hpp"

using namespace ipdsaw;
using namespace ipdsaw::rescaling;

namespace {

walk::WalkPath critical_walk(std::int64_t L, Rng& rng) {
  return sampler::sample_critical_walk(L, model::critical_params(), rng, sampler::default_budget(L)).walk;
}

StepFunction step(std::vector<double> v, double rate = 4.0, double end = 1.0) {
  StepFunction f;
  f.rate = rate;
  f.values = std::move(v);
  f.domain_end = end;
  return f;
}

bool all_zero(const StepFunction& f) {
  return std::all_of(f.values.begin(), f.values.end(), [](double x) { return x == 0.0; });
}

}  // namespace

TEST_SUITE("rescaling") {

TEST_CASE("tilde endpoint") {
  Rng rng(1);
  for (std::int64_t L : {10, 200, 3000}) {
    const auto v = critical_walk(L, rng);
    const auto t = rescale_processes(v, L, Variant::tilde);
    const std::size_t xi = walk::AreaClock(v).xi(L);
    CHECK(t.profile(1.0) == static_cast<double>(v[xi]) / std::cbrt(static_cast<double>(L)));
    CHECK(t.profile.domain_end == 1.0);
  }
}

TEST_CASE("hat and tilde are related by the area clock") {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const std::int64_t L = 5 + rep * 13;
    const auto v = critical_walk(L, rng);
    const auto r = time_change_residual(v, L);
    CHECK(r.profile == 0.0);
    CHECK(r.com == 0.0);
  }
  // unconditioned walks too, as long as K reaches L
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = testing::model_walk(rng, 400);
    const std::int64_t L = walk::AreaClock(w).K().back();
    const auto r = time_change_residual(w, L);
    CHECK(r.profile == 0.0);
    CHECK(r.com == 0.0);
  }
}

TEST_CASE("zero walk rescales to zero") {
  const walk::WalkPath v(std::vector<std::int64_t>(30, 0), walk::StartLaw::zero);
  for (auto variant : {Variant::hat, Variant::tilde}) {
    const auto p = rescale_processes(v, 20, variant);
    CHECK(all_zero(p.profile));
    CHECK(all_zero(p.com));
  }
}

TEST_CASE("variant misuse") {
  const walk::WalkPath v({0, 1, 0}, walk::StartLaw::zero);
  CHECK_THROWS_AS(rescale_processes(v, 2, Variant::polymer), ValidationError);
  CHECK_THROWS_AS(rescale_processes(v, 2, Variant::truncated), ValidationError);
  CHECK_THROWS_AS(rescale_processes(v, 100, Variant::tilde), RangeError);
}

TEST_CASE("hopping sum telescopes") {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::int64_t L = 10 + rep * 37;
    CHECK(hopping_sum_residual(critical_walk(L, rng), L) <= 1e-9);
  }
}

TEST_CASE("polymer processes") {
  const model::StretchConfig l({3, -1, 0, 2});
  const auto p = rescale_polymer(l);
  const double s = std::cbrt(10.0);
  // s is folded at compile time; runtime cbrt may differ by an ulp
  const auto near = [](double x) { return doctest::Approx(x).epsilon(1e-14); };
  const std::vector<double> h{0, 3 / s, 1 / s, 0, 2 / s};
  REQUIRE(p.profile.values.size() == h.size());
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(p.profile.values[i] == near(h[i]));
  const auto m = walk::center_of_mass(l);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(p.com.values[i] == near(m[i] / s));
  CHECK(p.profile.rate == doctest::Approx(s * s));
  // past the extension the profile keeps its last value
  CHECK(p.profile(100.0) == near(2 / s));
}

TEST_CASE("truncation: hand case with threshold 10") {
  const walk::WalkPath v({0, 2, 1, -1, -3, 2, 0, 0, 0, 0, 1, 0}, walk::StartLaw::zero);
  const auto d = walk::decompose_excursions(v);
  CHECK(d.weights == std::vector<std::int64_t>{7, 7, 1, 6});
  const std::int64_t L = 20;
  const auto t = truncate_discrete(v, L, 2);
  CHECK(all_zero(t.profile));
  CHECK(all_zero(t.com));
  CHECK_FALSE(all_zero(rescale_processes(v, L, Variant::tilde).profile));
}

TEST_CASE("truncation: threshold above every excursion") {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = testing::model_walk(rng, 50 + rep);
    const auto d = walk::decompose_excursions(w);
    std::int64_t max_x = d.open ? d.open->weight() : 0;
    for (auto x : d.weights) max_x = std::max(max_x, x);
    const std::int64_t L = walk::AreaClock(w).K().back();
    if (L <= max_x) continue;
    const auto t = truncate_discrete(w, L, 1);
    CHECK(all_zero(t.profile));
    CHECK(all_zero(t.com));
  }
}

TEST_CASE("truncation: threshold below every excursion") {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const std::int64_t L = 20 + rep * 11;
    const auto v = critical_walk(L, rng);
    const auto t = truncate_discrete(v, L, L);
    const auto full = rescale_processes(v, L, Variant::tilde);
    CHECK(t.profile.values == full.profile.values);
    CHECK(t.com.values == full.com.values);
  }
}

TEST_CASE("truncation: the profile distance is nonincreasing in k") {
  Rng rng(6);
  for (int rep = 0; rep < 60; ++rep) {
    const std::int64_t L = 500 + rep * 50;
    const auto v = critical_walk(L, rng);
    const auto full = rescale_processes(v, L, Variant::tilde);
    double prev = std::numeric_limits<double>::infinity();
    for (std::int64_t k = 1; k <= 64; k *= 2) {
      const double d = sup_distance(full.profile, truncate_discrete(v, L, k).profile);
      CHECK(d <= prev);
      prev = d;
    }
  }
}

TEST_CASE("truncation: the center-of-mass distance shrinks in probability") {
  const std::int64_t L = 4000;
  const std::vector<std::int64_t> ks{1, 4, 16, 64};
  std::vector<std::vector<double>> dist(ks.size());
  Rng rng(7);
  const sampler::Steppers st(model::critical_params());
  for (int rep = 0; rep < 400; ++rep) {
    const auto v = sampler::sample_renewal_conditioned(L, st, walk::StartLaw::zero, rng, 10'000'000).walk;
    const auto full = rescale_processes(v, L, Variant::tilde);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      dist[i].push_back(sup_distance(full.com, truncate_discrete(v, L, ks[i]).com));
    }
  }
  double prev = std::numeric_limits<double>::infinity();
  for (auto& d : dist) {
    std::sort(d.begin(), d.end());
    const double q = d[static_cast<std::size_t>(0.9 * static_cast<double>(d.size()))];
    MESSAGE("0.9-quantile " << q);
    CHECK(q < prev);
    prev = q;
  }
}

TEST_CASE("truncation: k must be positive") {
  const walk::WalkPath v({0, 1, 0}, walk::StartLaw::zero);
  CHECK_THROWS_AS(truncate_discrete(v, 2, 0), DomainError);
}

TEST_CASE("interpolation") {
  const auto c = step({2, 2, 2, 2, 2});
  const auto ci = interpolate(c);
  for (double s = 0; s <= 1.0; s += 0.01) CHECK(ci(s) == doctest::Approx(2.0));

  const auto f = step({0, 1, 3, -1, 0});
  const auto fi = interpolate(f);
  CHECK(fi(0.125) == doctest::Approx(0.5));
  CHECK(fi(0.375) == doctest::Approx(2.0));
  CHECK(fi(0.625) == doctest::Approx(1.0));

  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v;
    for (int i = 0; i < 30; ++i) v.push_back(rng.normal());
    auto g = step(v, 29.0);
    CHECK(sup_distance(g, interpolate(g)) <= g.max_jump() + 1e-12);
  }
}

TEST_CASE("uniform distance") {
  const auto f = step({0, 1, 3, -1, 0});
  CHECK(sup_distance(f, f) == 0.0);
  CHECK(sup_distance(step({0, 0, 0}), step({2.5, 2.5, 2.5})) == doctest::Approx(2.5));
  CHECK_THROWS_AS(sup_distance(step({0, 1}), step({0, 1}, 4.0, std::numeric_limits<double>::infinity())),
                  DomainError);

  Rng rng(9);
  for (int rep = 0; rep < 300; ++rep) {
    auto gen = [&] {
      std::vector<double> v;
      const int n = 2 + static_cast<int>(testing::uniform_int(rng, 0, 20));
      for (int i = 0; i < n; ++i) v.push_back(rng.normal());
      return step(v, 1.0 + static_cast<double>(testing::uniform_int(rng, 1, 12)));
    };
    const Function a = gen(), b = gen();
    const Function c = interpolate(gen());
    CHECK(sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-12);
    CHECK(sup_distance(a, b) == doctest::Approx(sup_distance(b, a)));
  }
}

TEST_CASE("metric on the half line") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto zero = step({0}, 1.0, inf);
  const auto half = step({0.5}, 1.0, inf);
  // sum_{k>=1} 2^{-k} min(1, 0.5), truncated at kMetricTerms terms
  CHECK(sup_distance(zero, half) == doctest::Approx(0.5 * (1.0 - std::ldexp(1.0, -kMetricTerms))));
  CHECK(sup_distance(zero, zero) == 0.0);
  const auto big = step({5.0}, 1.0, inf);
  CHECK(sup_distance(zero, big) <= 1.0);
}

}  // TEST_SUITE
