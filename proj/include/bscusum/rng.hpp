#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace bscusum {

/// SplitMix64 finalizer. Used for seeding and for deriving sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Mixes a master seed with a path of indices into an independent sub-seed.
/// derive_seed(s, {a, b}) depends only on (s, a, b), never on call order, so
/// parallel work keyed by index reproduces the sequential result exactly.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// xoshiro256++ (Blackman & Vigna). All variates are produced by the
/// transforms below rather than <random> distributions, whose algorithms are
/// implementation-defined, so streams are identical across platforms.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_pos() noexcept;
  /// Uniform integer on [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via the Marsaglia polar method (pairs cached).
  double normal() noexcept;
  /// Exponential with unit mean by inversion.
  double exponential() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bscusum
