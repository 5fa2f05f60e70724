#pragma once

#include <cstdint>

namespace ipdsaw {

/// Counter-based deterministic generator.
///
/// The i-th output of a stream is `mix(key + (i + 1) * kWeyl)` where `mix` is
/// the SplitMix64 finalizer and `key` is derived from `(seed, stream)` by
/// `derive_key`. Outputs depend only on (seed, stream, counter), so a replica
/// that owns its stream produces the same numbers regardless of scheduling.
class Rng {
 public:
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Stream for replica `index` of a run seeded with `master_seed`.
  static Rng for_replica(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(master_seed, index);
  }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept { return mix(key_ + (++counter_) * kWeyl); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Symmetric Bernoulli trial with values +1 and -1.
  int sign() noexcept { return (next_u64() >> 63) ? 1 : -1; }

  /// Standard normal deviate (Marsaglia polar method, second value cached).
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ipdsaw
