#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bscusum/cusum.hpp"
#include "bscusum/density.hpp"
#include "bscusum/distributions.hpp"
#include "bscusum/sampler.hpp"

namespace bscusum {

struct CalibrationConfig {
  double arl0 = 200.0;
  std::size_t j_max = 50;
  double target_sprint = 37.5;     // target E[T_n]
  std::size_t boot_reps = 2000;    // B
  std::size_t tune_reps = 100;     // N_1
  double epsilon = 0.2;            // bracket width
  double epsilon_tilde = 0.02;     // exit tolerance on |RL - ARL0| / ARL0
  std::size_t max_tune_iters = 50;
  std::uint64_t seed = 1;

  bool variance_correction = true;
  double sprint_tolerance = 0.05;  // relative tolerance of the k bisection
  std::size_t max_k_iters = 30;
  std::uint64_t sprint_budget = 10'000;   // steps per bootstrap stream in select_k
  std::uint64_t step_budget_factor = 10'000;  // preliminary limits: budget = factor * B steps per j
  std::uint64_t run_cap = 0;       // 0 means 50 * arl0
  unsigned threads = 0;            // 0 means hardware concurrency

  void validate() const;
  std::uint64_t effective_cap() const;
};

/// alpha_hat = 1 / (p_hat^2 * arl0), p_hat = share of Phase-I values above k.
double estimate_alpha_hat(std::span<const double> phase1, double k, double arl0);
/// Same rule from a known exceedance probability.
double alpha_from_exceedance(double p_hat, double arl0);

struct KBounds {
  double lower;
  double initial;
  double upper;
};

/// First, second and third sample quartiles (type-7 interpolation).
KBounds quartile_bounds(std::span<const double> data);
KBounds quartile_bounds(const DistributionModel& model);

struct KSelection {
  double k = 0.0;
  double estimated_sprint = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool at_bound = false;  // target unreachable inside the bounds; k is the nearest bound
};

/// Mean length of the sprint starting at n = 1 over `reps` streams from the
/// sampler (0 when the first step leaves C at zero, capped at `budget`).
double mean_first_sprint(const Sampler& sampler, double k, std::size_t reps, std::uint64_t budget,
                         std::uint64_t seed, unsigned threads = 0);

/// Bisection on k so the mean first sprint length hits target_sprint.
KSelection select_k(const Sampler& sampler, KBounds bounds, const CalibrationConfig& cfg);
/// Plain bootstrap from normalized Phase-I data between its quartiles.
KSelection select_k(std::span<const double> normalized_phase1, const CalibrationConfig& cfg);

struct PreliminaryLimits {
  std::vector<double> m;  // M_1..M_jmax
  double m_star = 0.0;
  double alpha_hat = 0.0;
  std::vector<std::size_t> conditional_counts;
};

/// 1-based rank ceil(B * (1 - alpha)) clamped to [1, B].
std::size_t order_statistic_rank(std::size_t b, double alpha);

/// Draws B values of [C | T = j] for one j by running the CUSUM on sampler
/// draws and recording C each time the sprint length reaches j.
std::vector<double> conditional_cusum_sample(const Sampler& sampler, double k, std::size_t j, std::size_t count,
                                             std::uint64_t seed, std::uint64_t step_budget);

PreliminaryLimits bootstrap_preliminary_limits(const Sampler& sampler, double k, double alpha_hat,
                                               const CalibrationConfig& cfg);

/// Mean in-control run length of a schedule over cfg.tune_reps streams from
/// the sampler. Stream r always uses the same sub-seed.
double simulate_mean_run_length(const Sampler& sampler, const LimitSchedule& schedule, std::size_t reps,
                                std::uint64_t cap, std::uint64_t seed, unsigned threads = 0);

/// One interpolation step: weights chosen so the run length would hit arl0
/// if RL were linear in the limits between the two brackets.
LimitSchedule interpolate_limits(const LimitSchedule& low, double rl_low, const LimitSchedule& high, double rl_high,
                                 double arl0);

struct TuneStep {
  double rl;
  double scale;  // current limits / preliminary limits
};

struct TuneResult {
  LimitSchedule schedule;
  double achieved_rl = 0.0;
  std::size_t iterations = 0;
  double epsilon_used = 0.0;
  std::vector<TuneStep> history;
};

TuneResult tune_limits(const Sampler& sampler, double k, const PreliminaryLimits& prelim,
                       const CalibrationConfig& cfg);

struct CalibrationResult {
  LimitSchedule schedule;  // normalized units: monitor (x - phase1.mean) / phase1.sd
  FittedDensity density;   // fitted to the normalized data
  SampleMoments phase1;
  KSelection k_selection;
  PreliminaryLimits preliminary;
  TuneResult tuning;
};

/// normalize -> fit_kde -> select_k -> preliminary limits -> tuning.
CalibrationResult calibrate(std::span<const double> phase1, const CalibrationConfig& cfg);

struct KnownCalibration {
  LimitSchedule schedule;
  KSelection k_selection;
  PreliminaryLimits preliminary;
  TuneResult tuning;
};

/// Same procedure with the analytic F standing in for the fitted density.
KnownCalibration calibrate_known(const DistributionModel& model, const CalibrationConfig& cfg);

struct ReducedSchedule {
  LimitSchedule schedule;
  double achieved_rl;
  std::size_t iterations;
  std::string warning;
};

/// Keeps h_1..h_{new_j_max} and re-tunes only h* to hit arl0.
ReducedSchedule reduce_horizon(const Sampler& sampler, const LimitSchedule& schedule, std::size_t new_j_max,
                               const CalibrationConfig& cfg);

}  // namespace bscusum
