#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bscusum/error.hpp"

namespace bscusum {

/// CUSUM value C_n, sprint length T_n (steps since C was last zero) and the
/// number of observations consumed.
struct CusumState {
  double c = 0.0;
  std::uint64_t t = 0;
  std::uint64_t n = 0;

  friend bool operator==(const CusumState&, const CusumState&) = default;
};

/// Allowance k plus one limit per sprint length 1..j_max and a tail limit
/// for sprints longer than j_max.
class LimitSchedule {
 public:
  LimitSchedule(double k, std::vector<double> limits, double h_star);

  /// A constant-limit chart expressed as a schedule (j_max = 1, h_1 = h* = h).
  static LimitSchedule constant(double k, double h);

  double k() const noexcept { return k_; }
  std::size_t j_max() const noexcept { return limits_.size(); }
  std::span<const double> limits() const noexcept { return limits_; }
  double h_star() const noexcept { return h_star_; }

  /// Limit in force for sprint length t >= 1.
  double limit_for(std::uint64_t t) const noexcept { return t <= limits_.size() ? limits_[t - 1] : h_star_; }

  /// Every limit (including h*) multiplied by `factor`; k unchanged.
  LimitSchedule scaled(double factor) const;

  friend bool operator==(const LimitSchedule&, const LimitSchedule&) = default;

 private:
  double k_;
  std::vector<double> limits_;
  double h_star_;
};

/// One CUSUM update: c' = max(c + x - k, 0), t' = 0 if c' == 0 else t + 1.
/// Throws DataError for non-finite x.
CusumState cusum_step(const CusumState& state, double x, double k);

/// Strict exceedance of the limit indexed by the current sprint length.
inline bool signal_check(const CusumState& state, const LimitSchedule& schedule) noexcept {
  return state.t > 0 && state.c > schedule.limit_for(state.t);
}

struct RunOutcome {
  std::uint64_t length = 0;
  bool truncated = false;

  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

/// Runs the chart on values pulled from `next()` until the first signal or
/// until `cap` observations have been seen (reported as truncated). `next`
/// returns either a double (infinite source) or std::optional<double>, where
/// nullopt means the source is exhausted, which throws StreamEnded.
template <class Source>
RunOutcome run_length(Source&& next, const LimitSchedule& schedule, std::uint64_t cap) {
  if (cap == 0) throw UsageError("run_length: cap must be >= 1");
  const double k = schedule.k();
  double c = 0.0;
  std::uint64_t t = 0;
  for (std::uint64_t n = 1; n <= cap; ++n) {
    double x;
    if constexpr (std::is_same_v<std::decay_t<decltype(next())>, std::optional<double>>) {
      const auto v = next();
      if (!v) throw StreamEnded("run_length: stream ended after " + std::to_string(n - 1) + " observations");
      x = *v;
    } else {
      x = next();
    }
    if (!std::isfinite(x)) throw DataError("run_length: non-finite observation");
    c = std::max(c + x - k, 0.0);
    if (c > 0.0) {
      ++t;
      if (c > schedule.limit_for(t)) return {n, false};
    } else {
      t = 0;
    }
  }
  return {cap, true};
}

/// Convenience overload over a finite sequence.
RunOutcome run_length(std::span<const double> stream, const LimitSchedule& schedule, std::uint64_t cap);

/// Mean run length with its standard error (sample SD / sqrt(reps)).
struct RunLengthSummary {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t truncated = 0;
};

RunLengthSummary summarize_runs(std::span<const RunOutcome> runs);
RunLengthSummary summarize_runs(std::span<const double> run_lengths);

}  // namespace bscusum
