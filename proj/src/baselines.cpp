#include "bscusum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bscusum/error.hpp"
#include "bscusum/parallel.hpp"
#include "bscusum/rng.hpp"

namespace bscusum {

namespace {

struct FrozenH {
  double k;
  double arl0;
  double h;
};

// classical_h_for_arl(k, arl0, 100000, seed = 20240601).
constexpr FrozenH kFrozen[] = {
    {0.0, 200.0, 12.96875},
    {0.25, 200.0, 5.59375},
    {0.5, 200.0, 3.498046875},
};

double mean_normal_run_length(double k, double h, std::size_t reps, std::uint64_t cap, std::uint64_t seed,
                              unsigned threads) {
  const auto schedule = LimitSchedule::constant(k, h);
  std::vector<double> lengths(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {r}));
    lengths[r] = static_cast<double>(run_length([&] { return rng.normal(); }, schedule, cap).length);
  });
  return std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(reps);
}

}  // namespace

void ClassicalParams::validate() const {
  if (!(k >= 0.0) || !std::isfinite(k)) throw UsageError("classical CUSUM: k must be finite and >= 0");
  if (!(h > 0.0)) throw UsageError("classical CUSUM: h must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("classical CUSUM: sigma must be > 0");
  if (!std::isfinite(mu)) throw UsageError("classical CUSUM: mu must be finite");
}

void NpCusumParams::validate() const {
  if (g < 2) throw UsageError("NP CUSUM: block size g must be >= 2");
  if (std::isnan(k) || std::isnan(h)) throw UsageError("NP CUSUM: k and h must be numbers");
}

double classical_h_for_arl(double k, double arl0, std::size_t mc_reps, std::uint64_t seed, unsigned threads) {
  if (!(arl0 > 1.0)) throw UsageError("classical_h_for_arl: arl0 must exceed 1");
  if (!(k >= 0.0)) throw UsageError("classical_h_for_arl: k must be >= 0");
  if (mc_reps < 2) throw UsageError("classical_h_for_arl: need at least 2 replications");
  const auto cap = static_cast<std::uint64_t>(std::ceil(50.0 * arl0));
  auto arl = [&](double h) { return mean_normal_run_length(k, h, mc_reps, cap, seed, threads); };

  double lo = 1e-3;
  double hi = 1.0;
  for (int attempt = 0; arl(hi) <= arl0; ++attempt) {
    if (attempt == 12) throw NumericalError("classical_h_for_arl: could not bracket the target ARL");
    lo = hi;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 60; ++iter) {
    mid = 0.5 * (lo + hi);
    const double value = arl(mid);
    if (std::abs(value - arl0) / arl0 < 2e-3) break;
    (value < arl0 ? lo : hi) = mid;
  }
  return mid;
}

std::optional<double> frozen_classical_h(double k, double arl0) {
  for (const auto& f : kFrozen)
    if (f.h > 0.0 && std::abs(f.k - k) < 1e-12 && std::abs(f.arl0 - arl0) < 1e-12) return f.h;
  return std::nullopt;
}

double classical_h(double k, double arl0, unsigned threads) {
  if (auto h = frozen_classical_h(k, arl0)) return *h;
  return classical_h_for_arl(k, arl0, 100'000, 20240601, threads);
}

double signed_rank_block(std::span<const double> block) {
  const std::size_t g = block.size();
  std::vector<std::size_t> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return std::abs(block[a]) < std::abs(block[b]); });
  double v = 0.0;
  for (std::size_t i = 0; i < g;) {
    std::size_t j = i;
    while (j + 1 < g && std::abs(block[order[j + 1]]) == std::abs(block[order[i]])) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of ranks i+1 .. j+1
    for (std::size_t q = i; q <= j; ++q) {
      const double x = block[order[q]];
      v += x > 0.0 ? rank : (x < 0.0 ? -rank : 0.0);
    }
    i = j + 1;
  }
  return v;
}

}  // namespace bscusum
