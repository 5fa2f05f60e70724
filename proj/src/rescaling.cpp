#include "ipdsaw/rescaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::rescaling {

namespace {

std::size_t clamp_index(double k, std::size_t last) {
  if (k <= 0.0) return 0;
  if (k >= static_cast<double>(last)) return last;
  return static_cast<std::size_t>(k);
}

void check_domain(double s, double end, const char* who) {
  if (!(s >= 0.0) || s > end) {
    throw RangeError(std::string(who) + ": argument " + std::to_string(s) + " outside [0, " +
                     std::to_string(end) + "]");
  }
}

}  // namespace

double StepFunction::operator()(double s) const {
  check_domain(s, domain_end, "StepFunction");
  const std::size_t last = values.size() - 1;
  const double x = s * rate;
  return values[clamp_index(continuity == Continuity::right ? std::floor(x) : std::ceil(x), last)];
}

double StepFunction::cell_value(std::size_t k) const {
  const std::size_t last = values.size() - 1;
  const std::size_t idx = continuity == Continuity::right ? k : k + 1;
  return values[std::min(idx, last)];
}

double StepFunction::max_jump() const {
  double m = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) m = std::max(m, std::abs(values[k] - values[k - 1]));
  return m;
}

double PolygonalFunction::operator()(double s) const {
  check_domain(s, domain_end, "PolygonalFunction");
  const std::size_t last = values.size() - 1;
  const double x = s * rate;
  if (x >= static_cast<double>(last)) return values[last];
  const auto k = static_cast<std::size_t>(std::floor(x));
  const double frac = x - static_cast<double>(k);
  return values[k] + frac * (values[k + 1] - values[k]);
}

std::vector<double> com_sequence(std::span<const std::int64_t> v) {
  return walk::center_of_mass_alternating(v);
}

ScaledProcessPair rescale_processes(const walk::WalkPath& v, std::int64_t L, Variant variant) {
  if (L < 1) throw DomainError("rescale_processes: L must be positive");
  if (variant == Variant::polymer) {
    throw ValidationError("rescale_processes: the polymer variant is built from a StretchConfig");
  }
  if (variant == Variant::truncated) {
    throw ValidationError("rescale_processes: use truncate_discrete for the truncated variant");
  }
  const walk::AreaClock clock(v);
  const std::size_t xi_L = clock.xi(L);
  const std::vector<double> m = com_sequence(v.values);
  const double scale = std::cbrt(static_cast<double>(L));

  ScaledProcessPair out;
  out.variant = variant;
  if (variant == Variant::hat) {
    out.profile.rate = scale * scale;
    out.profile.continuity = Continuity::right;
    out.profile.domain_end = std::numeric_limits<double>::infinity();
    out.profile.values.resize(xi_L + 1);
    out.com = out.profile;
    for (std::size_t k = 0; k <= xi_L; ++k) {
      out.profile.values[k] = static_cast<double>(v[k]) / scale;
      out.com.values[k] = m[k] / scale;
    }
  } else {
    out.profile.rate = static_cast<double>(L);
    out.profile.continuity = Continuity::left;
    out.profile.domain_end = 1.0;
    out.profile.values.resize(static_cast<std::size_t>(L) + 1);
    out.com = out.profile;
    std::size_t i = 0;
    for (std::int64_t j = 0; j <= L; ++j) {
      while (clock[i] < j) ++i;  // i = xi_j
      out.profile.values[static_cast<std::size_t>(j)] = static_cast<double>(v[i]) / scale;
      out.com.values[static_cast<std::size_t>(j)] = m[i] / scale;
    }
  }
  return out;
}

ScaledProcessPair rescale_polymer(const model::StretchConfig& l) {
  const std::int64_t L = l.total_length();
  const double scale = std::cbrt(static_cast<double>(L));
  const std::vector<double> m = walk::center_of_mass(l);
  ScaledProcessPair out;
  out.variant = Variant::polymer;
  out.profile.rate = scale * scale;
  out.profile.continuity = Continuity::right;
  out.profile.domain_end = std::numeric_limits<double>::infinity();
  out.profile.values.assign(l.size() + 1, 0.0);
  out.com = out.profile;
  for (std::size_t i = 1; i <= l.size(); ++i) {
    out.profile.values[i] = static_cast<double>(std::abs(l[i - 1])) / scale;
    out.com.values[i] = m[i] / scale;
  }
  return out;
}

ScaledProcessPair truncate_discrete(const walk::WalkPath& v, std::int64_t L, std::int64_t k) {
  if (k < 1) throw DomainError("truncate_discrete: k must be >= 1");
  if (L < 1) throw DomainError("truncate_discrete: L must be positive");
  const walk::AreaClock clock(v);
  const walk::ExcursionDecomposition dec = walk::decompose_excursions(v);
  const std::vector<double> m = com_sequence(v.values);
  const std::size_t n = v.steps();
  const std::size_t completed = dec.count();

  // Excursion weights, with the open tail (if any) as excursion completed + 1.
  std::vector<std::int64_t> weight(dec.weights);
  if (dec.open) weight.push_back(dec.open->weight());
  auto large = [&](std::size_t t) {  // t is 1-based
    if (t > weight.size()) return false;
    return k * weight[t - 1] >= L;
  };

  // Advance t while tau_t <= i, except that a path ending on a renewal keeps
  // its final index in the last excursion.
  auto advance = [&](std::size_t& t, std::size_t i) {
    return t <= completed && dec.taus[t] <= i && !(i == n && !dec.open && t == completed);
  };

  std::vector<double> vplus(n + 1, 0.0), mplus(n + 1, 0.0);
  std::size_t t = 1;
  for (std::size_t i = 0; i <= n; ++i) {
    while (advance(t, i)) ++t;
    vplus[i] = large(t) ? static_cast<double>(v[i]) : 0.0;
  }

  // P(t) = sum_{j < tau_{t-1}} (-1)^{j-1} V_j is M_{tau_{t-1}} minus its
  // half-term, so the in-progress bracket is M_i - P(t).
  auto half_term = [&](std::size_t i) {
    const double h = static_cast<double>(v[i]) / 2.0;
    return (i % 2 == 1) ? h : -h;  // (-1)^{i-1} V_i / 2
  };
  t = 1;
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    while (advance(t, i)) {
      if (large(t)) {
        const double p_start = m[dec.taus[t - 1]] - half_term(dec.taus[t - 1]);
        const double p_end = m[dec.taus[t]] - half_term(dec.taus[t]);
        acc += p_end - p_start;  // M^exc(t)
      }
      ++t;
    }
    const double p_start = m[dec.taus[t - 1]] - half_term(dec.taus[t - 1]);
    mplus[i] = acc + (large(t) ? m[i] - p_start : 0.0);
  }

  const double scale = std::cbrt(static_cast<double>(L));
  ScaledProcessPair out;
  out.variant = Variant::truncated;
  out.profile.rate = static_cast<double>(L);
  out.profile.continuity = Continuity::left;
  out.profile.domain_end = 1.0;
  out.profile.values.resize(static_cast<std::size_t>(L) + 1);
  out.com = out.profile;
  std::size_t i = 0;
  for (std::int64_t j = 0; j <= L; ++j) {
    while (clock[i] < j) ++i;
    out.profile.values[static_cast<std::size_t>(j)] = vplus[i] / scale;
    out.com.values[static_cast<std::size_t>(j)] = mplus[i] / scale;
  }
  return out;
}

TimeChangeResidual time_change_residual(const walk::WalkPath& v, std::int64_t L) {
  const auto hat = rescale_processes(v, L, Variant::hat);
  const auto tilde = rescale_processes(v, L, Variant::tilde);
  const walk::AreaClock clock(v);
  TimeChangeResidual r;
  for (std::size_t j = 0; j < hat.profile.values.size(); ++j) {
    const auto target = static_cast<std::size_t>(clock[j]);
    r.profile = std::max(r.profile, std::abs(hat.profile.values[j] - tilde.profile.values[target]));
    r.com = std::max(r.com, std::abs(hat.com.values[j] - tilde.com.values[target]));
  }
  return r;
}

double hopping_sum_residual(const walk::WalkPath& v, std::int64_t L) {
  const walk::AreaClock clock(v);
  const std::size_t xi_L = clock.xi(L);
  double sum = 0.0, worst = 0.0;
  std::size_t i = 0;
  std::int64_t run = 0;
  for (std::int64_t j = 1; j <= clock[xi_L]; ++j) {
    std::size_t xi_j = i;
    while (clock[xi_j] < j) ++xi_j;
    if (xi_j != i && run > 0) {
      sum += static_cast<double>(run) / static_cast<double>(1 + std::abs(v[i]));
      worst = std::max(worst, std::abs(sum - static_cast<double>(i)));
      run = 0;
    }
    i = xi_j;
    ++run;
  }
  if (run > 0) {
    sum += static_cast<double>(run) / static_cast<double>(1 + std::abs(v[i]));
    worst = std::max(worst, std::abs(sum - static_cast<double>(i)));
  }
  return worst;
}

PolygonalFunction interpolate(const StepFunction& f) {
  return PolygonalFunction{f.rate, f.values, f.domain_end};
}

// --- distances ----------------------------------------------------------------

namespace {

double rate_of(const Function& f) {
  return std::visit([](const auto& g) { return g.rate; }, f);
}
std::size_t last_of(const Function& f) {
  return std::visit([](const auto& g) { return g.values.size() - 1; }, f);
}
double end_of(const Function& f) {
  return std::visit([](const auto& g) { return g.domain_end; }, f);
}
double value_at(const Function& f, double s) {
  return std::visit([s](const auto& g) { return g(s); }, f);
}

// One-sided limits of f on the open interval (a, b), on which f is affine.
std::pair<double, double> limits(const Function& f, double a, double b) {
  if (const auto* step = std::get_if<StepFunction>(&f)) {
    const double mid = 0.5 * (a + b) * step->rate;
    const std::size_t last = step->values.size() - 1;
    const double c = step->cell_value(clamp_index(std::floor(mid), last));
    return {c, c};
  }
  const auto& poly = std::get<PolygonalFunction>(f);
  return {poly(a), poly(b)};
}

void add_breakpoints(const Function& f, double T, std::vector<double>& out) {
  const double rate = rate_of(f);
  const std::size_t last = last_of(f);
  for (std::size_t j = 0; j <= last; ++j) {
    const double b = static_cast<double>(j) / rate;
    if (b >= T) break;
    out.push_back(b);
  }
}

// max |f - g| on each [k-1, k] (k = 1..buckets.size()) or on [0, T] when marks is empty.
void scan(const Function& f, const Function& g, double T, const std::vector<double>& marks,
          std::vector<double>& buckets) {
  std::vector<double> pts{0.0, T};
  add_breakpoints(f, T, pts);
  add_breakpoints(g, T, pts);
  pts.insert(pts.end(), marks.begin(), marks.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  auto bucket_of = [&](double x) {
    if (marks.empty()) return std::size_t{0};
    auto it = std::lower_bound(marks.begin(), marks.end(), x);
    return std::min(static_cast<std::size_t>(it - marks.begin()), buckets.size() - 1);
  };
  auto bump = [&](std::size_t b, double d) { buckets[b] = std::max(buckets[b], d); };

  bump(0, std::abs(value_at(f, 0.0) - value_at(g, 0.0)));
  bump(bucket_of(T), std::abs(value_at(f, T) - value_at(g, T)));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (!(b > a)) continue;
    const auto [fa, fb] = limits(f, a, b);
    const auto [ga, gb] = limits(g, a, b);
    bump(bucket_of(b), std::max(std::abs(fa - ga), std::abs(fb - gb)));
  }
}

}  // namespace

double sup_on(const Function& f, const Function& g, double T) {
  if (!(T >= 0.0) || T > end_of(f) || T > end_of(g)) {
    throw DomainError("sup_on: interval not inside both domains");
  }
  std::vector<double> bucket(1, 0.0);
  scan(f, g, T, {}, bucket);
  return bucket[0];
}

double sup_distance(const Function& f, const Function& g) {
  const double ef = end_of(f), eg = end_of(g);
  if (ef != eg) throw DomainError("sup_distance: functions live on different domains");
  if (std::isfinite(ef)) return sup_on(f, g, ef);
  std::vector<double> marks;
  for (int k = 1; k <= kMetricTerms; ++k) marks.push_back(static_cast<double>(k));
  std::vector<double> bucket(kMetricTerms, 0.0);
  scan(f, g, static_cast<double>(kMetricTerms), marks, bucket);
  double d = 0.0, running = 0.0, weight = 1.0;
  for (int k = 1; k <= kMetricTerms; ++k) {
    running = std::max(running, bucket[static_cast<std::size_t>(k - 1)]);
    weight *= 0.5;
    d += weight * std::min(1.0, running);
  }
  return d;
}

}  // namespace ipdsaw::rescaling
