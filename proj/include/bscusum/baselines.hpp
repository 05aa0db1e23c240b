#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "bscusum/cusum.hpp"

namespace bscusum {

/// Constant-limit CUSUM applied to (x - mu) / sigma.
struct ClassicalParams {
  double k = 0.0;
  double h = 1.0;
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
};

/// Bakir-Reynolds within-block signed-rank CUSUM.
struct NpCusumParams {
  std::size_t g = 10;
  double k = 13.0;
  double h = 24.0;

  void validate() const;
};

/// Monte Carlo bisection for the constant limit giving in-control ARL arl0
/// under N(0, 1). Every evaluation reuses the same mc_reps streams.
double classical_h_for_arl(double k, double arl0, std::size_t mc_reps, std::uint64_t seed, unsigned threads = 0);

/// Frozen results of classical_h_for_arl (10^5 runs) for the (k, arl0)
/// pairs used by the run-length studies; nullopt when the pair is not stored.
std::optional<double> frozen_classical_h(double k, double arl0);

/// frozen_classical_h when available, otherwise a fresh Monte Carlo search.
double classical_h(double k, double arl0, unsigned threads = 0);

template <class Source>
RunOutcome classical_run(Source&& next, const ClassicalParams& params, std::uint64_t cap) {
  params.validate();
  const auto schedule = LimitSchedule::constant(params.k, params.h);
  if constexpr (std::is_same_v<std::decay_t<decltype(next())>, std::optional<double>>) {
    return run_length(
        [&]() -> std::optional<double> {
          auto v = next();
          if (v) *v = (*v - params.mu) / params.sigma;
          return v;
        },
        schedule, cap);
  } else {
    return run_length([&] { return (next() - params.mu) / params.sigma; }, schedule, cap);
  }
}

/// V = sum sign(x_j) * rank(|x_j|); tied magnitudes share their average rank.
double signed_rank_block(std::span<const double> block);

/// Run length in observations (g times the first block index with S > h).
/// Truncates at the largest multiple of g not exceeding cap.
template <class Source>
RunOutcome np_cusum_run(Source&& next, const NpCusumParams& params, std::uint64_t cap) {
  params.validate();
  std::vector<double> block(params.g);
  double s = 0.0;
  std::uint64_t observed = 0;
  while (observed + params.g <= cap) {
    for (double& x : block) {
      if constexpr (std::is_same_v<std::decay_t<decltype(next())>, std::optional<double>>) {
        const auto v = next();
        if (!v) throw StreamEnded("np_cusum_run: stream ended inside a block");
        x = *v;
      } else {
        x = next();
      }
    }
    observed += params.g;
    s = std::max(0.0, s + signed_rank_block(block) - params.k);
    if (s > params.h) return {observed, false};
  }
  return {observed, true};
}

}  // namespace bscusum
