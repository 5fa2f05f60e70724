#include "ipdsaw/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::continuum {

namespace {

constexpr double kBesselDim = 4.0 / 3.0;
constexpr double kLastZeroArea = 2.0;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

// Area of the trapezoid rule on one cell.
double cell_area(double b0, double b1, double h) { return 0.5 * h * (std::abs(b0) + std::abs(b1)); }

}  // namespace

double GridPath::time(std::size_t k) const {
  return std::min(static_cast<double>(k) * dt, end_time);
}

double GridPath::operator()(double t) const {
  if (!(t >= 0.0) || t > end_time) {
    throw RangeError("GridPath: time " + std::to_string(t) + " outside [0, " +
                     std::to_string(end_time) + "]");
  }
  const std::size_t last = values.size() - 1;
  if (last == 0) return values[0];
  auto k = static_cast<std::size_t>(std::floor(t / dt));
  k = std::min(k, last - 1);
  const double t0 = time(k), t1 = time(k + 1);
  if (t1 <= t0) return values[k + 1];
  const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  return values[k] + w * (values[k + 1] - values[k]);
}

double GridPath::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

GridPath simulate_bm(double sigma2, double dt, double horizon, Rng& rng) {
  require_positive(sigma2, "simulate_bm: sigma2");
  require_positive(dt, "simulate_bm: dt");
  require_positive(horizon, "simulate_bm: horizon");
  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  GridPath b;
  b.dt = dt;
  b.variance_rate = sigma2;
  b.end_time = static_cast<double>(n) * dt;
  b.values.resize(n + 1);
  b.values[0] = 0.0;
  const double sd = std::sqrt(sigma2 * dt);
  for (std::size_t k = 1; k <= n; ++k) b.values[k] = b.values[k - 1] + sd * rng.normal();
  return b;
}

AreaProcess::AreaProcess(const GridPath& b) {
  const std::size_t n = b.values.size();
  times_.resize(n);
  area_.resize(n);
  area_[0] = 0.0;
  times_[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    times_[k] = b.time(k);
    area_[k] = area_[k - 1] + cell_area(b.values[k - 1], b.values[k], times_[k] - times_[k - 1]);
  }
}

double AreaProcess::operator()(double t) const {
  if (!(t >= 0.0) || t > times_.back()) throw RangeError("AreaProcess: time outside the path");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return area_.back();
  const auto k = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return area_[k - 1] + w * (area_[k] - area_[k - 1]);
}

double AreaProcess::inverse(double s) const {
  if (s > area_.back()) {
    throw RangeError("AreaProcess::inverse: level " + std::to_string(s) + " beyond A = " +
                     std::to_string(area_.back()));
  }
  if (s <= 0.0) return 0.0;
  auto it = std::lower_bound(area_.begin(), area_.end(), s);
  const auto k = static_cast<std::size_t>(it - area_.begin());
  const double da = area_[k] - area_[k - 1];
  if (da <= 0.0) return times_[k];
  return times_[k - 1] + (s - area_[k - 1]) / da * (times_[k] - times_[k - 1]);
}

// --- conditioned limit ----------------------------------------------------------

namespace {

double inverse_on(const GridPath& b, const std::vector<double>& area, double s) {
  s = std::clamp(s, 0.0, area.back());
  if (s <= 0.0) return 0.0;
  auto it = std::lower_bound(area.begin(), area.end(), s);
  const auto k = static_cast<std::size_t>(it - area.begin());
  const double da = area[k] - area[k - 1];
  const double t0 = b.time(k - 1), t1 = b.time(k);
  if (da <= 0.0) return t1;
  return std::min(t0 + (s - area[k - 1]) / da * (t1 - t0), b.end_time);
}

GridPath companion_bm(const GridPath& b, double sigma2, Rng& rng) {
  GridPath d;
  d.dt = b.dt;
  d.variance_rate = sigma2;
  d.end_time = b.end_time;
  d.values.resize(b.values.size());
  d.values[0] = 0.0;
  for (std::size_t k = 1; k < d.values.size(); ++k) {
    const double h = b.time(k) - b.time(k - 1);
    d.values[k] = d.values[k - 1] + std::sqrt(sigma2 * h) * rng.normal();
  }
  return d;
}

// Path of B up to the first time its area reaches one; accepted iff the
// endpoint lies within epsilon of 0.
bool try_epsilon(const LimitSettings& st, Rng& rng, GridPath& out) {
  const double sd = std::sqrt(st.sigma2 * st.dt);
  std::vector<double> b{0.0};
  double area = 0.0;
  for (;;) {
    const double prev = b.back();
    const double next = prev + sd * rng.normal();
    const double da = cell_area(prev, next, st.dt);
    if (area + da >= 1.0) {
      const double w = (1.0 - area) / da;
      const double end = prev + w * (next - prev);
      if (std::abs(end) > st.epsilon) return false;
      const double t_prev = static_cast<double>(b.size() - 1) * st.dt;
      out.dt = st.dt;
      out.variance_rate = st.sigma2;
      out.end_time = t_prev + w * st.dt;
      if (w > 0.0) b.push_back(end);
      out.values = std::move(b);
      return true;
    }
    area += da;
    b.push_back(next);
  }
}

// Path of B up to its last zero before the area reaches kLastZeroArea,
// rescaled so that its area is one. Rejected when that area is below one, so
// that the rescaled step never exceeds dt.
bool try_last_zero(const LimitSettings& st, Rng& rng, GridPath& out) {
  const double sd = std::sqrt(st.sigma2 * st.dt);
  std::vector<double> b{0.0};
  double area = 0.0;
  std::size_t zero_cell = 0;  // zero lies in (t_k, t_{k+1}]
  double zero_time = 0.0, zero_area = 0.0;
  for (;;) {
    const double prev = b.back();
    const double next = prev + sd * rng.normal();
    const double da = cell_area(prev, next, st.dt);
    const std::size_t k = b.size() - 1;
    if (prev != 0.0 && (next == 0.0 || (prev < 0.0) != (next < 0.0))) {
      const double frac = std::abs(prev) / (std::abs(prev) + std::abs(next));
      const double za = area + 0.5 * frac * st.dt * std::abs(prev);
      if (za <= kLastZeroArea) {
        zero_cell = k;
        zero_time = (static_cast<double>(k) + frac) * st.dt;
        zero_area = za;
      }
    }
    area += da;
    b.push_back(next);
    if (area >= kLastZeroArea) break;
  }
  if (zero_area < 1.0) return false;
  const double time_scale = std::pow(zero_area, -2.0 / 3.0);
  const double space_scale = std::pow(zero_area, -1.0 / 3.0);
  b.resize(zero_cell + 1);
  for (double& v : b) v *= space_scale;
  if (zero_time > static_cast<double>(zero_cell) * st.dt) b.push_back(0.0);
  out.dt = st.dt * time_scale;
  out.variance_rate = st.sigma2;
  out.end_time = zero_time * time_scale;
  out.values = std::move(b);
  return true;
}

}  // namespace

double LimitSample::a(double s) const { return inverse_on(B, area, s); }
double LimitSample::B_tilde(double s) const { return B(a(s)); }
double LimitSample::D_tilde(double s) const { return D(a(s)); }

LimitSample sample_conditioned_limit(const LimitSettings& st, Rng& rng) {
  require_positive(st.sigma2, "sample_conditioned_limit: sigma2");
  require_positive(st.d_sigma2, "sample_conditioned_limit: d_sigma2");
  require_positive(st.dt, "sample_conditioned_limit: dt");
  require_positive(st.epsilon, "sample_conditioned_limit: epsilon");
  if (st.budget < 1) throw DomainError("sample_conditioned_limit: budget must be >= 1");
  LimitSample out;
  for (std::uint64_t attempt = 1; attempt <= st.budget; ++attempt) {
    const bool ok = st.method == Conditioning::epsilon ? try_epsilon(st, rng, out.B)
                                                       : try_last_zero(st, rng, out.B);
    if (!ok) continue;
    out.D = companion_bm(out.B, st.d_sigma2, rng);
    out.area = AreaProcess(out.B).values();
    out.a1 = out.B.end_time;
    out.epsilon = st.epsilon;
    out.attempts = attempt;
    return out;
  }
  throw BudgetError("sample_conditioned_limit: no accepted path", st.budget);
}

GridPath sample_Y_bessel(double dt, Rng& rng) {
  require_positive(dt, "sample_Y_bessel: dt");
  const auto n = static_cast<std::size_t>(std::llround(1.0 / dt));
  if (n < 2) throw DomainError("sample_Y_bessel: dt too large");
  const double h = 1.0 / static_cast<double>(n);
  const double sq = std::sqrt(h);
  const double coef = std::pow(1.5, 2.0 / 3.0);
  GridPath y;
  y.dt = h;
  y.variance_rate = 1.0;
  y.end_time = 1.0;
  y.values.assign(n + 1, 0.0);
  double x = 0.0;  // rho^2
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const double remaining = std::max(1.0 - t, h);
    x += (kBesselDim - 2.0 * x / remaining) * h + 2.0 * std::sqrt(x) * sq * rng.normal();
    x = std::abs(x);
    y.values[k + 1] = coef * std::cbrt(x);
  }
  y.values[n] = 0.0;
  return y;
}

double BandPolygon::area() const {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [x0, y0] = vertices[i];
    const auto& [x1, y1] = vertices[(i + 1) % n];
    a += x0 * y1 - x1 * y0;
  }
  return std::abs(a) / 2.0;
}

double BandPolygon::x_min() const {
  double m = vertices.front().first;
  for (const auto& v : vertices) m = std::min(m, v.first);
  return m;
}

double BandPolygon::x_max() const {
  double m = vertices.front().first;
  for (const auto& v : vertices) m = std::max(m, v.first);
  return m;
}

BandPolygon build_S_crit(const LimitSample& sample) {
  BandPolygon p;
  const std::size_t n = sample.B.values.size();
  p.vertices.reserve(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    p.vertices.emplace_back(sample.B.time(k), sample.D.values[k] + std::abs(sample.B.values[k]) / 2);
  }
  for (std::size_t k = n; k-- > 0;) {
    p.vertices.emplace_back(sample.B.time(k), sample.D.values[k] - std::abs(sample.B.values[k]) / 2);
  }
  return p;
}

std::vector<Excursion> excursions_of(const LimitSample& sample) {
  const auto& b = sample.B.values;
  std::vector<Excursion> out;
  double start = 0.0, start_area = 0.0, area = 0.0;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    const double t0 = sample.B.time(k), t1 = sample.B.time(k + 1);
    const double prev = b[k], next = b[k + 1];
    if (prev != 0.0 && (next == 0.0 || (prev < 0.0) != (next < 0.0))) {
      const double frac = std::abs(prev) / (std::abs(prev) + std::abs(next));
      const double tz = t0 + frac * (t1 - t0);
      const double az = area + 0.5 * frac * (t1 - t0) * std::abs(prev);
      if (tz > start) out.push_back({start, tz, az - start_area});
      start = tz;
      start_area = az;
    }
    area += cell_area(prev, next, t1 - t0);
  }
  if (sample.a1 > start) out.push_back({start, sample.a1, area - start_area});
  return out;
}

TruncatedLimit truncate_continuum(const LimitSample& sample, std::int64_t k, std::size_t m) {
  if (k < 1) throw DomainError("truncate_continuum: k must be >= 1");
  if (m < 1) throw DomainError("truncate_continuum: grid must have at least one cell");
  TruncatedLimit out;
  for (const auto& e : excursions_of(sample)) {
    if (static_cast<double>(k) * e.area >= 1.0) out.kept.emplace_back(e.start, e.end);
  }
  // Measure of [a, b] inside the kept intervals.
  auto overlap = [&](double a, double b) {
    double total = 0.0;
    auto it = std::lower_bound(out.kept.begin(), out.kept.end(), a,
                               [](const auto& iv, double x) { return iv.second < x; });
    for (; it != out.kept.end() && it->first < b; ++it) {
      total += std::max(0.0, std::min(b, it->second) - std::max(a, it->first));
    }
    return total;
  };
  auto inside = [&](double t) {
    auto it = std::lower_bound(out.kept.begin(), out.kept.end(), t,
                               [](const auto& iv, double x) { return iv.second < x; });
    return it != out.kept.end() && it->first <= t;
  };

  const auto& d = sample.D.values;
  std::vector<double> cum(d.size(), 0.0);
  for (std::size_t j = 1; j < d.size(); ++j) {
    const double t0 = sample.B.time(j - 1), t1 = sample.B.time(j);
    const double f = t1 > t0 ? overlap(t0, t1) / (t1 - t0) : 0.0;
    cum[j] = cum[j - 1] + f * (d[j] - d[j - 1]);
  }
  auto dk_at = [&](double t) {
    auto j = static_cast<std::size_t>(std::floor(t / sample.B.dt));
    j = std::min(j, d.size() - 1);
    while (j > 0 && sample.B.time(j) > t) --j;
    if (j + 1 >= d.size()) return cum[j];
    const double t0 = sample.B.time(j), t1 = sample.B.time(j + 1);
    if (t1 <= t0) return cum[j];
    return cum[j] + overlap(t0, t) / (t1 - t0) * (d[j + 1] - d[j]);
  };

  out.s.resize(m + 1);
  out.B.resize(m + 1);
  out.Bk.resize(m + 1);
  out.D.resize(m + 1);
  out.Dk.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(m);
    const double t = sample.a(s);
    out.s[j] = s;
    out.B[j] = sample.B(t);
    out.Bk[j] = inside(t) ? out.B[j] : 0.0;
    out.D[j] = sample.D(t);
    out.Dk[j] = dk_at(t);
  }
  return out;
}

}  // namespace ipdsaw::continuum
