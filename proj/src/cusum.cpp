#include "bscusum/cusum.hpp"

#include <algorithm>
#include <string>

namespace bscusum {

LimitSchedule::LimitSchedule(double k, std::vector<double> limits, double h_star)
    : k_(k), limits_(std::move(limits)), h_star_(h_star) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw UsageError("LimitSchedule: k must be finite and >= 0");
  if (limits_.empty()) throw UsageError("LimitSchedule: j_max must be >= 1");
  auto positive = [](double h) { return h > 0.0 && !std::isnan(h); };
  if (!std::ranges::all_of(limits_, positive) || !positive(h_star_))
    throw UsageError("LimitSchedule: every limit must be > 0");
}

LimitSchedule LimitSchedule::constant(double k, double h) { return LimitSchedule(k, {h}, h); }

LimitSchedule LimitSchedule::scaled(double factor) const {
  std::vector<double> h(limits_);
  for (double& v : h) v *= factor;
  return LimitSchedule(k_, std::move(h), h_star_ * factor);
}

CusumState cusum_step(const CusumState& state, double x, double k) {
  if (!std::isfinite(x)) throw DataError("cusum_step: non-finite observation");
  CusumState out;
  out.c = std::max(state.c + x - k, 0.0);
  out.t = out.c > 0.0 ? state.t + 1 : 0;
  out.n = state.n + 1;
  return out;
}

RunOutcome run_length(std::span<const double> stream, const LimitSchedule& schedule, std::uint64_t cap) {
  std::size_t i = 0;
  return run_length(
      [&]() -> std::optional<double> {
        if (i == stream.size()) return std::nullopt;
        return stream[i++];
      },
      schedule, cap);
}

RunLengthSummary summarize_runs(std::span<const double> run_lengths) {
  const std::size_t reps = run_lengths.size();
  if (reps < 2) throw UsageError("summarize_runs: at least 2 runs are required");
  double mean = 0.0;
  for (double r : run_lengths) mean += r;
  mean /= static_cast<double>(reps);
  double ss = 0.0;
  for (double r : run_lengths) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(reps - 1));
  return {mean, sd / std::sqrt(static_cast<double>(reps)), reps, 0};
}

RunLengthSummary summarize_runs(std::span<const RunOutcome> runs) {
  std::vector<double> lengths;
  lengths.reserve(runs.size());
  std::uint64_t truncated = 0;
  for (const auto& r : runs) {
    lengths.push_back(static_cast<double>(r.length));
    truncated += r.truncated ? 1 : 0;
  }
  auto summary = summarize_runs(lengths);
  summary.truncated = truncated;
  return summary;
}

}  // namespace bscusum
