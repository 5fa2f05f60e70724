#include "ipdsaw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "ipdsaw/errors.hpp"
#include "ipdsaw/geometry.hpp"
#include "ipdsaw/model.hpp"
#include "ipdsaw/parallel.hpp"
#include "ipdsaw/rescaling.hpp"
#include "ipdsaw/sampler.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw::stats {

namespace {

// Integer bin edges n_0 < n_1 < ... < n_B; bin b is [n_b, n_{b+1}).
std::vector<std::int64_t> integer_edges(FitRange range, int per_decade) {
  if (!(range.lo >= 1.0) || !(range.hi > range.lo)) {
    throw DomainError("fit_tail_exponent: need 1 <= lo < hi");
  }
  if (per_decade < 1) throw DomainError("fit_tail_exponent: bins_per_decade must be positive");
  const auto first = static_cast<std::int64_t>(std::ceil(range.lo));
  const auto last = static_cast<std::int64_t>(std::floor(range.hi)) + 1;
  const double step = std::pow(10.0, 1.0 / per_decade);
  std::vector<std::int64_t> edges{first};
  double e = static_cast<double>(first);
  while (edges.back() < last) {
    e *= step;
    const auto n = std::min(last, std::max(edges.back() + 1, static_cast<std::int64_t>(std::ceil(e))));
    edges.push_back(n);
  }
  return edges;
}

struct Line {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0;
  bool ok = false;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Line out;
  const std::size_t m = x.size();
  if (m < 3) return out;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - out.intercept - out.slope * x[i];
    ssr += r * r;
  }
  out.slope_se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  out.ok = true;
  return out;
}

// counts[b] for b < B are in-range bin counts; counts[B] holds values >= n_B.
Line fit_counts(const std::vector<double>& counts, const std::vector<std::int64_t>& edges,
                double normaliser, TailKind kind) {
  const std::size_t B = edges.size() - 1;
  std::vector<double> x, y;
  if (kind == TailKind::mass) {
    for (std::size_t b = 0; b < B; ++b) {
      if (counts[b] <= 0.0) continue;
      const double width = static_cast<double>(edges[b + 1] - edges[b]);
      const double centre = std::sqrt(static_cast<double>(edges[b]) * static_cast<double>(edges[b + 1] - 1));
      x.push_back(std::log(centre));
      y.push_back(std::log(counts[b] / (normaliser * width)));
    }
  } else {
    double tail = counts[B];
    std::vector<double> surv(B);
    for (std::size_t b = B; b-- > 0;) {
      tail += counts[b];
      surv[b] = tail;
    }
    for (std::size_t b = 0; b < B; ++b) {
      if (surv[b] <= 0.0) continue;
      x.push_back(std::log(static_cast<double>(edges[b])));
      y.push_back(std::log(surv[b] / normaliser));
    }
  }
  return least_squares(x, y);
}

}  // namespace

TailFit fit_tail_exponent(const std::vector<std::vector<std::int64_t>>& groups, FitRange range,
                          const TailFitOptions& options) {
  if (groups.empty()) throw ValidationError("fit_tail_exponent: no data");
  const auto edges = integer_edges(range, options.bins_per_decade);
  const std::size_t B = edges.size() - 1;

  // Per-group bin hits, flattened; index B means beyond the range.
  std::vector<std::uint32_t> hits;
  std::vector<std::size_t> offsets{0};
  std::size_t points = 0;
  for (const auto& g : groups) {
    for (std::int64_t v : g) {
      if (v < edges.front()) continue;
      const auto it = std::upper_bound(edges.begin(), edges.end(), v);
      const auto b = static_cast<std::size_t>(it - edges.begin()) - 1;
      const std::size_t idx = std::min(b, B);
      hits.push_back(static_cast<std::uint32_t>(idx));
      if (idx < B) ++points;
    }
    offsets.push_back(hits.size());
  }
  if (points < options.min_points) {
    throw ValidationError("fit_tail_exponent: insufficient data in range (" + std::to_string(points) + " points)");
  }

  const auto G = static_cast<double>(groups.size());
  std::vector<double> counts(B + 1, 0.0);
  for (auto h : hits) counts[h] += 1.0;
  const Line line = fit_counts(counts, edges, G, options.kind);
  if (!line.ok) throw ValidationError("fit_tail_exponent: fewer than three populated bins");

  TailFit out;
  out.exponent = -line.slope;
  out.prefactor = std::exp(line.intercept);
  out.points = points;
  out.bins = B;

  Rng rng(options.seed, 0x7a11);
  std::vector<double> boot;
  for (int r = 0; r < options.bootstrap; ++r) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto g = static_cast<std::size_t>(rng.uniform() * G);
      for (std::size_t k = offsets[g]; k < offsets[g + 1]; ++k) counts[hits[k]] += 1.0;
    }
    const Line l = fit_counts(counts, edges, G, options.kind);
    if (l.ok) boot.push_back(-l.slope);
  }
  if (boot.size() >= 2) {
    out.std_error = mean_se(boot).se * std::sqrt(static_cast<double>(boot.size()));
  } else {
    out.std_error = line.slope_se;
  }
  return out;
}

TailFit fit_tail_exponent(std::span<const std::int64_t> samples, FitRange range,
                          const TailFitOptions& options) {
  std::vector<std::vector<std::int64_t>> groups;
  groups.reserve(samples.size());
  for (auto v : samples) groups.push_back({v});
  return fit_tail_exponent(groups, range, options);
}

TailFit fit_tail_exponent_pmf(std::span<const double> pmf, FitRange range, const TailFitOptions& options) {
  auto edges = integer_edges(range, options.bins_per_decade);
  if (edges.back() > static_cast<std::int64_t>(pmf.size())) {
    throw ValidationError("fit_tail_exponent_pmf: range exceeds the pmf");
  }
  const std::size_t B = edges.size() - 1;
  std::vector<double> counts(B + 1, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    for (auto n = edges[b]; n < edges[b + 1]; ++n) counts[b] += pmf[static_cast<std::size_t>(n)];
  }
  for (auto n = static_cast<std::size_t>(edges.back()); n < pmf.size(); ++n) counts[B] += pmf[n];
  const Line line = fit_counts(counts, edges, 1.0, options.kind);
  if (!line.ok) throw ValidationError("fit_tail_exponent_pmf: fewer than three populated bins");
  TailFit out;
  out.exponent = -line.slope;
  out.std_error = line.slope_se;
  out.prefactor = std::exp(line.intercept);
  out.points = static_cast<std::size_t>(edges.back() - edges.front());
  out.bins = B;
  return out;
}

std::int64_t synthetic_power_law(double alpha, Rng& rng) {
  if (!(alpha > 1.0)) throw DomainError("synthetic_power_law: alpha must exceed 1");
  const double x = std::pow(rng.uniform_open(), -1.0 / (alpha - 1.0));
  return x >= 9e18 ? std::int64_t{9'000'000'000'000'000'000} : static_cast<std::int64_t>(std::floor(x));
}

// --- distances -----------------------------------------------------------------

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi form of the cdf, fast for small lambda.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 9; k += 2) sum += std::pow(y, k * k);
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

namespace {
double ks_p(double d, double ne) {
  const double s = std::sqrt(ne);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}
}  // namespace

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return TestResult{d, ks_p(d, n * m / (n + m)), 0};
}

TestResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    const double v = x[i];
    const double f = cdf(v);
    const double below = static_cast<double>(i) / n;
    while (i < x.size() && x[i] == v) ++i;
    const double at = static_cast<double>(i) / n;
    d = std::max({d, std::abs(f - below), std::abs(at - f)});
  }
  return TestResult{d, ks_p(d, n), 0};
}

TestResult chi_square(std::span<const std::uint64_t> observed, std::span<const double> probabilities,
                      double min_expected) {
  if (observed.size() != probabilities.size()) throw DomainError("chi_square: size mismatch");
  const double total_p = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  if (std::abs(total_p - 1.0) > 1e-6) throw DomainError("chi_square: probabilities must sum to 1");
  double n = 0.0;
  for (auto o : observed) n += static_cast<double>(o);
  if (n <= 0.0) throw DomainError("chi_square: no observations");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probabilities[i] < 0.0) throw DomainError("chi_square: negative probability");
    if (probabilities[i] == 0.0) {
      if (observed[i] != 0) throw DomainError("chi_square: observation in a zero-probability cell");
      continue;
    }
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return probabilities[l] < probabilities[r]; });

  std::vector<std::pair<double, double>> cells;  // (observed, expected)
  double po = 0.0, pe = 0.0;
  for (std::size_t i : order) {
    po += static_cast<double>(observed[i]);
    pe += n * probabilities[i] / total_p;
    if (pe >= min_expected) {
      cells.emplace_back(po, pe);
      po = pe = 0.0;
    }
  }
  if (pe > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(po, pe);
    } else {
      cells.back().first += po;
      cells.back().second += pe;
    }
  }
  if (cells.size() < 2) throw DomainError("chi_square: fewer than two cells after pooling");

  double stat = 0.0;
  for (const auto& [o, e] : cells) stat += (o - e) * (o - e) / e;
  const std::size_t dof = cells.size() - 1;
  const double p = boost::math::gamma_q(static_cast<double>(dof) / 2.0, stat / 2.0);
  return TestResult{stat, p, dof};
}

// --- y_L -------------------------------------------------------------------------

std::int64_t YlTable::k0(double level) const {
  for (const auto& r : rows) {
    if (r.survival + 3.0 * r.survival_se < level) return r.k;
  }
  return -1;
}

YlTable yl_table(std::span<const std::int64_t> y, std::int64_t k_max, std::size_t min_replicas) {
  if (y.size() < min_replicas) {
    throw ValidationError("yl_table: need at least " + std::to_string(min_replicas) + " replicas");
  }
  if (k_max < 0) throw DomainError("yl_table: k_max must be nonnegative");
  std::vector<std::size_t> above(static_cast<std::size_t>(k_max) + 2, 0);  // above[k+1] = #{y > k}
  for (auto v : y) {
    if (v < 0) throw ValidationError("yl_table: negative y_L");
    const auto top = std::min<std::int64_t>(v, k_max + 1);
    for (std::int64_t k = -1; k < top; ++k) ++above[static_cast<std::size_t>(k + 1)];
  }
  YlTable t;
  t.replicas = y.size();
  const auto n = static_cast<double>(y.size());
  for (std::int64_t k = 0; k <= k_max; ++k) {
    YlRow r;
    r.k = k;
    const auto cnt = static_cast<double>(above[static_cast<std::size_t>(k + 1)]);
    r.survival = cnt / n;
    r.survival_se = std::sqrt(r.survival * (1.0 - r.survival) / n);
    r.at_risk = above[static_cast<std::size_t>(k)];
    if (k > 0 && r.at_risk > 0) {
      const auto risk = static_cast<double>(r.at_risk);
      r.ratio = cnt / risk;
      r.ratio_se = std::sqrt(r.ratio * (1.0 - r.ratio) / risk);
    }
    t.rows.push_back(r);
  }
  return t;
}

// --- shape experiment -----------------------------------------------------------

Estimate mean_se(std::span<const double> v) {
  Estimate e;
  if (v.empty()) return e;
  const auto n = static_cast<double>(v.size());
  e.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return e;
  double ss = 0.0;
  for (double x : v) ss += (x - e.mean) * (x - e.mean);
  e.se = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median: empty input");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

namespace {

continuum::LimitSettings reference_settings(const ShapeConfig& config) {
  auto st = config.continuum;
  if (config.critical_variances) {
    st.sigma2 = model::critical_params().sigma2;
    st.d_sigma2 = st.sigma2 / 4.0;
  }
  return st;
}

struct ShapeDraw {
  double extension = 0.0, height = 0.0, terminal = 0.0, area = 0.0;
  bool area_exact = false;
  bool has_hausdorff = false;
  double hausdorff = 0.0, hausdorff_err = 0.0;
};

std::uint64_t cell_seed(std::uint64_t seed, std::int64_t L, std::size_t group) {
  return Rng::derive_key(seed, (static_cast<std::uint64_t>(L) << 8) ^ group);
}

}  // namespace

ShapeReference continuum_reference(const ShapeConfig& config) {
  const auto st = reference_settings(config);
  struct Draw {
    double a1 = 0.0, height = 0.0, terminal = 0.0;
  };
  const auto draws = parallel::run_replicas(
      config.continuum_replicas, Rng::derive_key(config.seed, 0xC0'0000),
      [&](std::size_t, Rng& rng) {
        const auto s = continuum::sample_conditioned_limit(st, rng);
        return Draw{s.a1, s.B.max_abs(), s.D.values.back()};
      },
      config.jobs);
  ShapeReference ref;
  ref.replicas = draws.size();
  for (const auto& d : draws) {
    ref.a1.push_back(d.a1);
    ref.height.push_back(d.height);
    ref.terminal.push_back(d.terminal);
  }
  return ref;
}

std::vector<ShapeRow> shape_experiment(const ShapeConfig& config, const ShapeReference& reference) {
  if (reference.a1.empty()) throw ValidationError("shape_experiment: empty continuum reference");
  std::vector<ShapeRow> rows;
  for (const auto L : config.lengths) {
    const std::uint64_t budget = config.budget ? config.budget : sampler::default_budget(L);
    const double c = std::cbrt(static_cast<double>(L));
    const auto scale = geometry::critical_scale(L);
    const double exact_area = static_cast<double>(L + 1) / static_cast<double>(L);
    for (std::size_t g = 0; g < config.seed_groups; ++g) {
      const std::size_t hd = config.hausdorff_replicas ? config.hausdorff_replicas : config.replicas;
      const auto draws = parallel::run_replicas(
          config.replicas, cell_seed(config.seed, L, g),
          [&](std::size_t i, Rng& rng) {
            const auto s = sampler::sample_critical_polymer(L, rng, budget);
            const auto& l = s.config;
            ShapeDraw d;
            d.extension = static_cast<double>(l.size()) / (c * c);
            std::int64_t hmax = 0;
            for (auto v : l.stretches()) hmax = std::max(hmax, std::abs(v));
            d.height = static_cast<double>(hmax) / c;
            d.terminal = walk::center_of_mass(l).back() / c;
            const auto lattice = model::to_lattice(l);
            const auto occ = geometry::occupied_set(lattice);
            d.area = geometry::scaled_area(occ, scale);
            d.area_exact = d.area == exact_area;
            if (i < hd) {
              const auto band = geometry::polymer_band(l);
              const auto h = geometry::hausdorff(band, geometry::rescale(occ, scale),
                                                 geometry::default_pitch(scale));
              d.has_hausdorff = true;
              d.hausdorff = h.distance;
              d.hausdorff_err = h.error_bound;
            }
            return d;
          },
          config.jobs);

      ShapeRow row;
      row.L = L;
      row.group = g;
      row.replicas = draws.size();
      std::vector<double> ext, hgt, term, hs;
      row.area_min = std::numeric_limits<double>::infinity();
      row.area_max = -row.area_min;
      row.area_exact = true;
      for (const auto& d : draws) {
        ext.push_back(d.extension);
        hgt.push_back(d.height);
        term.push_back(d.terminal);
        row.area_min = std::min(row.area_min, d.area);
        row.area_max = std::max(row.area_max, d.area);
        row.area_exact = row.area_exact && d.area_exact;
        if (d.has_hausdorff) {
          hs.push_back(d.hausdorff);
          row.hausdorff_max = std::max(row.hausdorff_max, d.hausdorff);
          // Counted against the certified upper bound, not the estimate.
          if (d.hausdorff + d.hausdorff_err > 1.0 / c) ++row.hausdorff_bound_violations;
        }
      }
      row.extension = mean_se(ext);
      row.height = mean_se(hgt);
      row.terminal_com = mean_se(term);
      row.median_extension = median(ext);
      row.ks_extension = ks_two_sample(ext, reference.a1).statistic;
      row.ks_height = ks_two_sample(hgt, reference.height).statistic;
      row.ks_terminal = ks_two_sample(term, reference.terminal).statistic;
      row.hausdorff_checked = hs.size();
      row.hausdorff = mean_se(hs);
      rows.push_back(row);
    }
  }
  return rows;
}

double median_over_groups(const std::vector<ShapeRow>& rows, std::int64_t L, double ShapeRow::*column) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.L == L) v.push_back(r.*column);
  }
  return median(std::move(v));
}

}  // namespace ipdsaw::stats
