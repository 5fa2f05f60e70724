#pragma once

// The IPDSAW polymer: parameters, the two configuration representations,
// Hamiltonians, exact laws and partition functions.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ipdsaw::model {

/// Coupling beta and the constants of the discrete Laplace increment law
/// P(U = k) = exp(-beta |k| / 2) / c_beta.
struct ModelParams {
  double beta = 0.0;
  double c_beta = 0.0;      // (1 + e^{-beta/2}) / (1 - e^{-beta/2})
  double sigma2 = 0.0;      // Var(U)
  double gamma_beta = 0.0;  // c_beta * e^{-beta}

  /// e^{-beta/2}, the geometric ratio of the increment law.
  double ratio() const;
};

ModelParams make_params(double beta);

/// Gamma_beta = c_beta e^{-beta}; strictly decreasing on (0, inf).
double gamma_of(double beta);

/// Root of Gamma_beta = 1 found by bisection on (0, 4).
double critical_beta(double tolerance = 1e-12);

/// make_params(critical_beta()), computed once.
const ModelParams& critical_params();

/// Signed vertical stretches l_1..l_N; total length L = N + sum |l_n|.
class StretchConfig {
 public:
  StretchConfig() = default;
  explicit StretchConfig(std::vector<std::int64_t> stretches);

  const std::vector<std::int64_t>& stretches() const { return stretches_; }
  std::size_t size() const { return stretches_.size(); }
  std::int64_t total_length() const { return total_length_; }
  std::int64_t operator[](std::size_t i) const { return stretches_[i]; }

  auto operator<=>(const StretchConfig& other) const { return stretches_ <=> other.stretches_; }
  bool operator==(const StretchConfig& other) const { return stretches_ == other.stretches_; }

 private:
  std::vector<std::int64_t> stretches_;
  std::int64_t total_length_ = 0;
};

enum class Step : char { up = 'U', down = 'D', right = 'R' };

struct Site {
  std::int64_t x = 0;
  std::int64_t y = 0;
  auto operator<=>(const Site&) const = default;
};

/// Path in W_L: steps over {U, D, R}, self-avoiding, last step R.
class LatticePath {
 public:
  LatticePath() = default;
  /// Throws ValidationError if the steps do not describe a member of W_L.
  explicit LatticePath(std::vector<Step> steps);
  static LatticePath from_string(std::string_view steps);

  const std::vector<Step>& steps() const { return steps_; }
  const std::vector<Site>& sites() const { return sites_; }
  std::size_t length() const { return steps_.size(); }
  std::string to_string() const;

  bool operator==(const LatticePath& other) const { return steps_ == other.steps_; }

 private:
  std::vector<Step> steps_;
  std::vector<Site> sites_;
};

/// Sum over consecutive stretches of |x| ^ |y| when xy < 0.
std::int64_t hamiltonian(const StretchConfig& l);

/// Number of non-consecutive site pairs at lattice distance one.
std::int64_t hamiltonian(const LatticePath& w);

LatticePath to_lattice(const StretchConfig& l);
StretchConfig to_stretches(const LatticePath& w);

/// T_N: l_i = (-1)^{i-1} V_i for i = 1..N. Requires V_0 = 0 and at least N + 1 values.
StretchConfig from_walk(std::span<const std::int64_t> walk, std::size_t n_stretches);

/// Inverse of T_N: (V_0 = 0, V_1, ..., V_N, V_{N+1} = 0).
std::vector<std::int64_t> to_walk(const StretchConfig& l);

/// Number of configurations |Omega_L|.
std::uint64_t count_configurations(std::int64_t L);

/// Calls `visit(stretches)` for every l in Omega_L (depth-first, deterministic order).
template <class Visitor>
void for_each_configuration(std::int64_t L, Visitor&& visit);

/// Exact polymer law by enumeration of Omega_L. beta = 0 is allowed.
struct PolymerLaw {
  std::int64_t length = 0;
  double beta = 0.0;
  double partition = 0.0;
  std::vector<StretchConfig> configs;    // sorted by (N, l_1, ..., l_N)
  std::vector<double> probabilities;     // aligned with configs
  std::vector<double> extension_law;     // index N = 0..L, P(N_l = N)
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

PolymerLaw exact_polymer_law(std::int64_t L, double beta,
                             std::uint64_t cap = kDefaultEnumerationCap);

/// Partition function through the auxiliary walk:
/// Z = c e^{beta L} sum_N Gamma^N P(V_{N, L-N}).
struct PartitionDp {
  std::int64_t length = 0;
  double beta = 0.0;
  double partition = 0.0;       // may overflow to inf for large L; see log_partition
  double log_partition = 0.0;
  std::vector<double> walk_event;     // index N: P(G_N = L - N, V_{N+1} = 0)
  std::vector<double> extension_law;  // index N: P(N_l = N)
};

inline constexpr std::int64_t kDefaultDpMaxLength = 200;

PartitionDp partition_dp(std::int64_t L, double beta,
                         std::int64_t max_length = kDefaultDpMaxLength);

// ---------------------------------------------------------------------------

namespace detail {
template <class Visitor>
void enumerate_rest(std::int64_t remaining, std::vector<std::int64_t>& prefix,
                    Visitor& visit) {
  if (remaining == 0) {
    visit(std::as_const(prefix));
    return;
  }
  for (std::int64_t mag = remaining - 1; mag >= 1; --mag) {
    prefix.push_back(-mag);
    enumerate_rest(remaining - 1 - mag, prefix, visit);
    prefix.pop_back();
  }
  prefix.push_back(0);
  enumerate_rest(remaining - 1, prefix, visit);
  prefix.pop_back();
  for (std::int64_t mag = 1; mag <= remaining - 1; ++mag) {
    prefix.push_back(mag);
    enumerate_rest(remaining - 1 - mag, prefix, visit);
    prefix.pop_back();
  }
}
}  // namespace detail

template <class Visitor>
void for_each_configuration(std::int64_t L, Visitor&& visit) {
  std::vector<std::int64_t> prefix;
  prefix.reserve(static_cast<std::size_t>(L));
  detail::enumerate_rest(L, prefix, visit);
}

}  // namespace ipdsaw::model
