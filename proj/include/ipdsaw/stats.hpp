#pragma once

// Tail-exponent fits, KS and chi-square tests, the y_L tail table and the
// shape convergence experiment.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ipdsaw/continuum.hpp"
#include "ipdsaw/rng.hpp"

namespace ipdsaw::stats {

// --- tail fits ------------------------------------------------------------------

enum class TailKind {
  mass,      // P(X = n) ~ C n^{-alpha}
  survival,  // P(X >= n) ~ C n^{-alpha}
};

struct FitRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct TailFit {
  double exponent = 0.0;  // alpha, the negated log-log slope
  double std_error = 0.0; // bootstrap standard error
  double prefactor = 0.0; // exp(intercept); reported, never gated
  std::size_t points = 0; // observations inside the range
  std::size_t bins = 0;
};

struct TailFitOptions {
  TailKind kind = TailKind::mass;
  int bins_per_decade = 8;
  int bootstrap = 100;
  std::uint64_t seed = 0;  // bootstrap stream
  std::size_t min_points = 1000;
};

/// Observations are grouped: group g holds the values it contributed (one
/// value per group for iid samples, the hit list of one walk for renewal
/// frequencies). Masses are normalised by the number of groups, and the
/// bootstrap resamples groups. Throws ValidationError when fewer than
/// `min_points` observations fall in the range.
TailFit fit_tail_exponent(const std::vector<std::vector<std::int64_t>>& groups, FitRange range,
                          const TailFitOptions& options = {});

/// Convenience overload for iid samples.
TailFit fit_tail_exponent(std::span<const std::int64_t> samples, FitRange range,
                          const TailFitOptions& options = {});

/// Least-squares fit on a known pmf p[n] over integer n in the range (log
/// binned like the sample fit); std_error is the regression standard error.
TailFit fit_tail_exponent_pmf(std::span<const double> pmf, FitRange range,
                              const TailFitOptions& options = {});

/// X = floor(U^{-1/(alpha-1)}), so P(X >= n) = n^{-(alpha-1)} and the mass
/// decays like n^{-alpha}.
std::int64_t synthetic_power_law(double alpha, Rng& rng);

// --- distribution distances -------------------------------------------------------

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;  // chi-square only
};

/// Kolmogorov survival Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample KS. Ties are handled by advancing both ECDFs past equal values
/// before comparing, so D is the exact sup over the real line. The p-value is
/// asymptotic with Stephens' small-sample correction.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample KS against a continuous cdf.
TestResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Goodness-of-fit chi-square of counts against probabilities. Cells with
/// expected count below `min_expected` are pooled (smallest first) until
/// every pooled cell reaches it. Throws DomainError on a zero-probability cell
/// with observations, on mismatched sizes, or when fewer than two cells remain.
TestResult chi_square(std::span<const std::uint64_t> observed, std::span<const double> probabilities,
                      double min_expected = 5.0);

// --- y_L -------------------------------------------------------------------------

struct YlRow {
  std::int64_t k = 0;
  double survival = 0.0;  // P(y_L > k)
  double survival_se = 0.0;
  double ratio = 0.0;     // P(y_L > k) / P(y_L > k - 1); 0 for k = 0
  double ratio_se = 0.0;
  std::size_t at_risk = 0;  // #{y_L > k - 1}
};

struct YlTable {
  std::size_t replicas = 0;
  std::vector<YlRow> rows;

  /// Smallest k with P(y_L > k) + 3 se < level, or -1.
  std::int64_t k0(double level = 0.05) const;
};

/// Throws ValidationError below `min_replicas` or on a negative value.
YlTable yl_table(std::span<const std::int64_t> y, std::int64_t k_max, std::size_t min_replicas = 10000);

// --- shape experiment ---------------------------------------------------------------

struct ShapeConfig {
  std::vector<std::int64_t> lengths{2000, 8000, 32000};
  std::size_t replicas = 200;     // per length and seed group
  std::size_t seed_groups = 5;
  std::uint64_t seed = 1;
  std::uint64_t budget = 0;       // 0 selects the sampler default
  std::size_t continuum_replicas = 2000;
  continuum::LimitSettings continuum;
  bool critical_variances = true;      // overwrite sigma2 with sigma2(beta_c), d_sigma2 with a quarter of it
  std::size_t hausdorff_replicas = 0;  // per length and group; 0 means every replica
  unsigned jobs = 0;
};

/// Mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

struct ShapeRow {
  std::int64_t L = 0;
  std::size_t group = 0;
  std::size_t replicas = 0;
  Estimate extension;      // N / L^{2/3}
  Estimate height;         // max |l| / L^{1/3}
  Estimate terminal_com;   // M_N / L^{1/3}
  double ks_extension = 0.0;
  double ks_height = 0.0;
  double ks_terminal = 0.0;
  double median_extension = 0.0;
  double area_min = 0.0;   // scaled occupied area over replicas
  double area_max = 0.0;
  bool area_exact = false; // every replica had area (L+1)/L
  std::size_t hausdorff_checked = 0;
  Estimate hausdorff;
  double hausdorff_max = 0.0;
  std::size_t hausdorff_bound_violations = 0;  // paths with distance > L^{-1/3}
};

struct ShapeReference {
  std::size_t replicas = 0;
  std::vector<double> a1, height, terminal;
};

ShapeReference continuum_reference(const ShapeConfig& config);

std::vector<ShapeRow> shape_experiment(const ShapeConfig& config, const ShapeReference& reference);

/// Median over seed groups of a per-row column, for one length.
double median_over_groups(const std::vector<ShapeRow>& rows, std::int64_t L,
                          double ShapeRow::*column);

Estimate mean_se(std::span<const double> v);
double median(std::vector<double> v);

}  // namespace ipdsaw::stats
