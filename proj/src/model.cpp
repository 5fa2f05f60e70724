#include "ipdsaw/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::model {

double ModelParams::ratio() const { return std::exp(-beta / 2.0); }

ModelParams make_params(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("make_params: beta must be a finite positive number");
  }
  const double x = std::exp(-beta / 2.0);
  ModelParams p;
  p.beta = beta;
  p.c_beta = (1.0 + x) / (1.0 - x);
  p.gamma_beta = p.c_beta * std::exp(-beta);
  // 2/c * sum_k k^2 x^k in closed form.
  p.sigma2 = 2.0 * x * (1.0 + x) / (p.c_beta * std::pow(1.0 - x, 3));
  return p;
}

double gamma_of(double beta) {
  const double x = std::exp(-beta / 2.0);
  return (1.0 + x) / (1.0 - x) * x * x;
}

double critical_beta(double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("critical_beta: tolerance must be positive");
  double lo = 1e-6;  // Gamma(lo) > 1
  double hi = 4.0;   // Gamma(hi) < 1
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g = gamma_of(mid);
    if (g > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(gamma_of(lo) - 1.0) < std::abs(gamma_of(hi) - 1.0) ? lo : hi;
}

const ModelParams& critical_params() {
  static const ModelParams params = make_params(critical_beta());
  return params;
}

// --- configurations --------------------------------------------------------

StretchConfig::StretchConfig(std::vector<std::int64_t> stretches)
    : stretches_(std::move(stretches)) {
  if (stretches_.empty()) throw ValidationError("StretchConfig: at least one stretch required");
  total_length_ = static_cast<std::int64_t>(stretches_.size());
  for (auto l : stretches_) total_length_ += std::abs(l);
}

LatticePath::LatticePath(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw ValidationError("LatticePath: empty path");
  if (steps_.back() != Step::right) throw ValidationError("LatticePath: last step must be R");
  sites_.reserve(steps_.size() + 1);
  Site cur{0, 0};
  sites_.push_back(cur);
  for (auto s : steps_) {
    switch (s) {
      case Step::up: ++cur.y; break;
      case Step::down: --cur.y; break;
      case Step::right: ++cur.x; break;
      default: throw ValidationError("LatticePath: unknown step");
    }
    sites_.push_back(cur);
  }
  std::vector<Site> sorted = sites_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("LatticePath: path is not self-avoiding");
  }
}

LatticePath LatticePath::from_string(std::string_view text) {
  std::vector<Step> steps;
  steps.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'U': steps.push_back(Step::up); break;
      case 'D': steps.push_back(Step::down); break;
      case 'R': steps.push_back(Step::right); break;
      default: throw ValidationError(std::string("LatticePath: invalid step character '") + c + "'");
    }
  }
  return LatticePath(std::move(steps));
}

std::string LatticePath::to_string() const {
  std::string out;
  out.reserve(steps_.size());
  for (auto s : steps_) out.push_back(static_cast<char>(s));
  return out;
}

std::int64_t hamiltonian(const StretchConfig& l) {
  std::int64_t h = 0;
  const auto& s = l.stretches();
  for (std::size_t n = 0; n + 1 < s.size(); ++n) {
    if ((s[n] < 0 && s[n + 1] > 0) || (s[n] > 0 && s[n + 1] < 0)) {
      h += std::min(std::abs(s[n]), std::abs(s[n + 1]));
    }
  }
  return h;
}

std::int64_t hamiltonian(const LatticePath& w) {
  const auto& sites = w.sites();
  struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept {
      return std::hash<std::int64_t>{}(s.x * 1'000'003 + s.y);
    }
  };
  std::unordered_map<Site, std::int64_t, SiteHash> index;
  index.reserve(sites.size() * 2);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    index.emplace(sites[i], static_cast<std::int64_t>(i));
  }
  std::int64_t contacts = 0;
  constexpr std::int64_t dx[] = {1, -1, 0, 0};
  constexpr std::int64_t dy[] = {0, 0, 1, -1};
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (int d = 0; d < 4; ++d) {
      auto it = index.find(Site{sites[i].x + dx[d], sites[i].y + dy[d]});
      if (it != index.end() && std::abs(it->second - static_cast<std::int64_t>(i)) > 1) {
        ++contacts;
      }
    }
  }
  return contacts / 2;
}

LatticePath to_lattice(const StretchConfig& l) {
  std::vector<Step> steps;
  steps.reserve(static_cast<std::size_t>(l.total_length()));
  for (auto s : l.stretches()) {
    const Step v = s > 0 ? Step::up : Step::down;
    for (std::int64_t k = 0; k < std::abs(s); ++k) steps.push_back(v);
    steps.push_back(Step::right);
  }
  return LatticePath(std::move(steps));
}

StretchConfig to_stretches(const LatticePath& w) {
  std::vector<std::int64_t> out;
  std::int64_t run = 0;
  for (auto s : w.steps()) {
    if (s == Step::right) {
      out.push_back(run);
      run = 0;
    } else {
      const std::int64_t d = s == Step::up ? 1 : -1;
      if (run != 0 && (run > 0) != (d > 0)) {
        throw ValidationError("to_stretches: direction reversal inside a stretch");
      }
      run += d;
    }
  }
  return StretchConfig(std::move(out));
}

StretchConfig from_walk(std::span<const std::int64_t> walk, std::size_t n_stretches) {
  if (n_stretches == 0 || walk.size() < n_stretches + 1) {
    throw ValidationError("from_walk: walk too short for the requested number of stretches");
  }
  if (walk[0] != 0) throw ValidationError("from_walk: walk must start at 0");
  std::vector<std::int64_t> l(n_stretches);
  for (std::size_t i = 1; i <= n_stretches; ++i) {
    l[i - 1] = (i % 2 == 1) ? walk[i] : -walk[i];
  }
  return StretchConfig(std::move(l));
}

std::vector<std::int64_t> to_walk(const StretchConfig& l) {
  std::vector<std::int64_t> v(l.size() + 2, 0);
  for (std::size_t i = 1; i <= l.size(); ++i) {
    v[i] = (i % 2 == 1) ? l[i - 1] : -l[i - 1];
  }
  return v;
}

// --- exact laws -------------------------------------------------------------

std::uint64_t count_configurations(std::int64_t L) {
  if (L < 1) return 0;
  // A stretch of modulus m uses m + 1 units; m = 0 has one sign, m >= 1 two.
  std::vector<long double> count(static_cast<std::size_t>(L) + 1, 0.0L);
  count[0] = 1.0L;
  for (std::int64_t n = 1; n <= L; ++n) {
    long double c = count[static_cast<std::size_t>(n - 1)];
    for (std::int64_t j = 2; j <= n; ++j) c += 2.0L * count[static_cast<std::size_t>(n - j)];
    count[static_cast<std::size_t>(n)] = c;
  }
  const long double total = count[static_cast<std::size_t>(L)];
  if (total > static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(total);
}

PolymerLaw exact_polymer_law(std::int64_t L, double beta, std::uint64_t cap) {
  if (L < 1) throw DomainError("exact_polymer_law: L must be positive");
  if (beta < 0.0 || !std::isfinite(beta)) throw DomainError("exact_polymer_law: beta must be >= 0");
  const std::uint64_t n_configs = count_configurations(L);
  if (n_configs > cap) {
    throw SizeError("exact_polymer_law: |Omega_L| = " + std::to_string(n_configs) +
                    " exceeds the enumeration cap " + std::to_string(cap));
  }
  PolymerLaw law;
  law.length = L;
  law.beta = beta;
  law.configs.reserve(n_configs);
  for_each_configuration(L, [&](const std::vector<std::int64_t>& l) {
    law.configs.emplace_back(l);
  });
  std::sort(law.configs.begin(), law.configs.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });

  // Weights relative to the largest energy keep the sum finite at large beta.
  std::vector<std::int64_t> energy(law.configs.size());
  std::int64_t h_max = 0;
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    energy[i] = hamiltonian(law.configs[i]);
    h_max = std::max(h_max, energy[i]);
  }
  law.probabilities.resize(law.configs.size());
  law.extension_law.assign(static_cast<std::size_t>(L) + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    law.probabilities[i] = std::exp(beta * static_cast<double>(energy[i] - h_max));
    total += law.probabilities[i];
  }
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    law.probabilities[i] /= total;
    law.extension_law[law.configs[i].size()] += law.probabilities[i];
  }
  law.partition = total * std::exp(beta * static_cast<double>(h_max));
  return law;
}

PartitionDp partition_dp(std::int64_t L, double beta, std::int64_t max_length) {
  if (L < 1) throw DomainError("partition_dp: L must be positive");
  if (L > max_length) {
    throw SizeError("partition_dp: L = " + std::to_string(L) + " exceeds the DP budget " +
                    std::to_string(max_length));
  }
  const ModelParams params = make_params(beta);
  const double x = params.ratio();
  const double inv_c = 1.0 / params.c_beta;

  // Increment masses for |k| <= L.
  std::vector<double> pmf(static_cast<std::size_t>(L) + 1);
  pmf[0] = inv_c;
  for (std::int64_t k = 1; k <= L; ++k) pmf[static_cast<std::size_t>(k)] = pmf[static_cast<std::size_t>(k - 1)] * x;
  auto mass = [&](std::int64_t k) { return pmf[static_cast<std::size_t>(std::abs(k))]; };

  // State after n steps: (V_n, A_n = sum_{i<=n} |V_i|). Any state with
  // n + A_n > L is dead, which bounds |V_n| by L.
  const std::int64_t width = 2 * L + 1;
  auto idx = [&](std::int64_t v, std::int64_t a) {
    return static_cast<std::size_t>(a * width + (v + L));
  };
  std::vector<double> cur(static_cast<std::size_t>(width * (L + 1)), 0.0);
  std::vector<double> next(cur.size(), 0.0);
  cur[idx(0, 0)] = 1.0;

  PartitionDp out;
  out.length = L;
  out.beta = beta;
  out.walk_event.assign(static_cast<std::size_t>(L) + 1, 0.0);

  for (std::int64_t n = 1; n <= L; ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    const std::int64_t area_cap = L - n;  // A_n <= L - n
    for (std::int64_t a = 0; a <= L - (n - 1); ++a) {
      for (std::int64_t v = -a; v <= a; ++v) {
        const double p = cur[idx(v, a)];
        if (p == 0.0) continue;
        const std::int64_t room = area_cap - a;
        for (std::int64_t w = -room; w <= room; ++w) {
          next[idx(w, a + std::abs(w))] += p * mass(w - v);
        }
      }
    }
    std::swap(cur, next);
    // Close the walk: A_n = L - n and V_{n+1} = 0.
    double closed = 0.0;
    const std::int64_t a = L - n;
    for (std::int64_t v = -a; v <= a; ++v) closed += cur[idx(v, a)] * mass(v);
    out.walk_event[static_cast<std::size_t>(n)] = closed;
  }

  double weighted = 0.0;
  std::vector<double> terms(static_cast<std::size_t>(L) + 1, 0.0);
  for (std::int64_t n = 1; n <= L; ++n) {
    terms[static_cast<std::size_t>(n)] =
        std::pow(params.gamma_beta, static_cast<double>(n)) * out.walk_event[static_cast<std::size_t>(n)];
    weighted += terms[static_cast<std::size_t>(n)];
  }
  out.extension_law.assign(static_cast<std::size_t>(L) + 1, 0.0);
  for (std::int64_t n = 1; n <= L; ++n) {
    out.extension_law[static_cast<std::size_t>(n)] = terms[static_cast<std::size_t>(n)] / weighted;
  }
  out.log_partition = std::log(params.c_beta) + beta * static_cast<double>(L) + std::log(weighted);
  out.partition = std::exp(out.log_partition);
  return out;
}

}  // namespace ipdsaw::model
