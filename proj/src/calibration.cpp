#include "bscusum/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bscusum/error.hpp"
#include "bscusum/parallel.hpp"

namespace bscusum {

namespace {

// Sub-seed namespaces, so the stages never share streams.
constexpr std::uint64_t kTagSprint = 1;
constexpr std::uint64_t kTagPrelim = 2;
constexpr std::uint64_t kTagTune = 3;
constexpr std::uint64_t kTagReduce = 4;
constexpr std::size_t kMinPhase1 = 100;

double lower_factor(double eps) { return eps < 1.0 ? 1.0 - eps : 1.0 / (1.0 + eps); }

double quantile_type7(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Mean run length of a schedule under the given batch of common random numbers.
using Evaluate = std::function<double(const LimitSchedule&, std::uint64_t batch)>;
using Bracket = std::function<LimitSchedule(const LimitSchedule&, double factor)>;

// Relative bracket width (in scale) below which the bracket counts as collapsed.
constexpr double kCollapsedBracket = 1e-3;

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch) {
  return batch == 0 ? seed : derive_seed(seed, {batch});
}

// Regula falsi on a one-parameter family of schedules, with the bracket
// carry-forward rules of the fine-tuning procedure. Under fixed streams the
// mean run length is a step function of the scale, and a step can jump over
// the whole exit band. When the bracket collapses onto such a step, the
// streams are replaced by a fresh batch and bracketing restarts from the
// current schedule.
TuneResult tune_family(const LimitSchedule& start, const Evaluate& evaluate, const Bracket& bracket,
                       const CalibrationConfig& cfg, const std::function<double(const LimitSchedule&)>& scale_of) {
  const double target = cfg.arl0;
  auto check = [](double rl) {
    if (!std::isfinite(rl)) throw NumericalError("tune_limits: non-finite mean run length");
    return rl;
  };

  TuneResult result{start, 0.0, 0, cfg.epsilon, {}};
  LimitSchedule current = start;
  std::uint64_t batch = 0;
  double rl = check(evaluate(current, batch));
  result.history.push_back({rl, scale_of(current)});

  std::optional<LimitSchedule> upper;
  std::optional<LimitSchedule> lower;
  double rl_upper = 0.0;
  double rl_lower = 0.0;

  for (std::size_t iter = 0;; ++iter) {
    if (std::abs(rl - target) / target < cfg.epsilon_tilde) {
      result.schedule = current;
      result.achieved_rl = rl;
      result.iterations = iter;
      return result;
    }
    if (iter == cfg.max_tune_iters)
      throw NumericalError("tune_limits: exit rule not met within " + std::to_string(cfg.max_tune_iters) +
                           " iterations (last RL " + std::to_string(rl) + ")");

    if (rl < target) {
      if (!upper) {
        // First bracket: widen epsilon until the upper vector overshoots.
        double eps = result.epsilon_used;
        for (int attempt = 0;; ++attempt) {
          upper = bracket(current, 1.0 + eps);
          rl_upper = check(evaluate(*upper, batch));
          if (rl_upper > target) break;
          if (attempt == 3) throw NumericalError("tune_limits: upper bracket never exceeded ARL0");
          eps *= 2.0;
        }
        result.epsilon_used = eps;
      }
      if (!(rl_upper > target)) throw NumericalError("tune_limits: upper bracket lost");
      LimitSchedule next = interpolate_limits(current, rl, *upper, rl_upper, target);
      lower = current;
      rl_lower = rl;
      current = std::move(next);
    } else {
      if (!lower) {
        double eps = result.epsilon_used;
        for (int attempt = 0;; ++attempt) {
          lower = bracket(current, lower_factor(eps));
          rl_lower = check(evaluate(*lower, batch));
          if (rl_lower < target) break;
          if (attempt == 3) throw NumericalError("tune_limits: lower bracket never fell below ARL0");
          eps *= 2.0;
        }
        result.epsilon_used = eps;
      }
      if (!(rl_lower < target)) throw NumericalError("tune_limits: lower bracket lost");
      LimitSchedule next = interpolate_limits(*lower, rl_lower, current, rl, target);
      upper = current;
      rl_upper = rl;
      current = std::move(next);
    }
    if (lower && upper && scale_of(*upper) - scale_of(*lower) < kCollapsedBracket * scale_of(current)) {
      ++batch;
      lower.reset();
      upper.reset();
    }
    rl = check(evaluate(current, batch));
    result.history.push_back({rl, scale_of(current)});
  }
}

}  // namespace

void CalibrationConfig::validate() const {
  if (!(arl0 > 1.0)) throw UsageError("arl0 must exceed 1");
  if (j_max < 1) throw UsageError("j_max must be >= 1");
  if (!(target_sprint > 0.0)) throw UsageError("target sprint length must be > 0");
  if (target_sprint > static_cast<double>(j_max)) throw UsageError("target sprint length must not exceed j_max");
  if (boot_reps < 1) throw UsageError("boot_reps must be >= 1");
  if (tune_reps < 2) throw UsageError("tune_reps must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("epsilon must lie in (0, 1)");
  if (!(epsilon_tilde > 0.0 && epsilon_tilde < 1.0)) throw UsageError("epsilon_tilde must lie in (0, 1)");
  if (!(epsilon_tilde < epsilon)) throw UsageError("epsilon_tilde must be smaller than epsilon");
  if (!(sprint_tolerance > 0.0)) throw UsageError("sprint_tolerance must be > 0");
  if (sprint_budget < 1) throw UsageError("sprint_budget must be >= 1");
}

std::uint64_t CalibrationConfig::effective_cap() const {
  return run_cap > 0 ? run_cap : static_cast<std::uint64_t>(std::ceil(50.0 * arl0));
}

double alpha_from_exceedance(double p_hat, double arl0) {
  if (!(arl0 > 1.0)) throw UsageError("estimate_alpha_hat: arl0 must exceed 1");
  if (!(p_hat > 0.0)) throw DataError("allowance exceeds data range (no observation above k)");
  const double alpha = 1.0 / (p_hat * p_hat * arl0);
  if (!(alpha < 1.0)) throw DataError("ARL_0 too small for this k (alpha_hat >= 1)");
  return alpha;
}

double estimate_alpha_hat(std::span<const double> phase1, double k, double arl0) {
  if (phase1.empty()) throw DataError("estimate_alpha_hat: no data");
  const auto above = std::ranges::count_if(phase1, [k](double x) { return x > k; });
  return alpha_from_exceedance(static_cast<double>(above) / static_cast<double>(phase1.size()), arl0);
}

KBounds quartile_bounds(std::span<const double> data) {
  if (data.size() < 2) throw DataError("quartile_bounds: need at least 2 observations");
  std::vector<double> sorted(data.begin(), data.end());
  std::ranges::sort(sorted);
  return {quantile_type7(sorted, 0.25), quantile_type7(sorted, 0.5), quantile_type7(sorted, 0.75)};
}

KBounds quartile_bounds(const DistributionModel& model) {
  return {model.quantile(0.25), model.quantile(0.5), model.quantile(0.75)};
}

double mean_first_sprint(const Sampler& sampler, double k, std::size_t reps, std::uint64_t budget,
                         std::uint64_t seed, unsigned threads) {
  std::vector<double> lengths(reps);
  parallel_for(reps, threads, [&](std::size_t b) {
    Rng rng(derive_seed(seed, {kTagSprint, b}));
    double c = 0.0;
    std::uint64_t t = 0;
    while (t < budget) {
      c = std::max(c + sampler.draw(rng) - k, 0.0);
      if (c == 0.0) break;
      ++t;
    }
    lengths[b] = static_cast<double>(t);
  });
  return std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(reps);
}

KSelection select_k(const Sampler& sampler, KBounds bounds, const CalibrationConfig& cfg) {
  if (!(cfg.target_sprint > 0.0)) throw UsageError("select_k: target sprint length must be > 0");
  if (!(bounds.lower <= bounds.initial && bounds.initial <= bounds.upper))
    throw UsageError("select_k: bounds must satisfy lower <= initial <= upper");
  const double target = cfg.target_sprint;
  auto estimate = [&](double k) {
    return mean_first_sprint(sampler, k, cfg.boot_reps, cfg.sprint_budget, cfg.seed, cfg.threads);
  };

  // Schedules require k >= 0; standardized quartiles put the lower bound below zero.
  bounds.lower = std::max(bounds.lower, 0.0);
  bounds.initial = std::max(bounds.initial, bounds.lower);
  bounds.upper = std::max(bounds.upper, bounds.lower);
  double lo = bounds.lower;
  double hi = bounds.upper;
  double k = bounds.initial;
  KSelection sel;
  for (std::size_t iter = 1; iter <= cfg.max_k_iters; ++iter) {
    const double est = estimate(k);
    sel = {k, est, iter, false, false};
    if (std::abs(est - target) / target < cfg.sprint_tolerance) {
      sel.converged = true;
      return sel;
    }
    // Larger k makes the CUSUM fall back to zero sooner, shortening sprints.
    if (est > target) {
      lo = k;
      k = 0.5 * (hi + k);
    } else {
      hi = k;
      k = 0.5 * (lo + k);
    }
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) break;
  }
  // No convergence: if the search collapsed onto a bound, report that bound.
  const double span = bounds.upper - bounds.lower;
  if (std::abs(sel.k - bounds.upper) <= 1e-3 * span || std::abs(sel.k - bounds.lower) <= 1e-3 * span) {
    const bool too_long = sel.estimated_sprint > target;
    sel.k = too_long ? bounds.upper : bounds.lower;
    sel.estimated_sprint = estimate(sel.k);
    sel.at_bound = true;
  }
  return sel;
}

KSelection select_k(std::span<const double> normalized_phase1, const CalibrationConfig& cfg) {
  EmpiricalSampler sampler(std::vector<double>(normalized_phase1.begin(), normalized_phase1.end()));
  return select_k(sampler, quartile_bounds(normalized_phase1), cfg);
}

std::size_t order_statistic_rank(std::size_t b, double alpha) {
  const double r = std::ceil(static_cast<double>(b) * (1.0 - alpha));
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, b);
}

std::vector<double> conditional_cusum_sample(const Sampler& sampler, double k, std::size_t j, std::size_t count,
                                             std::uint64_t seed, std::uint64_t step_budget) {
  if (j < 1) throw UsageError("conditional_cusum_sample: j must be >= 1");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  double c = 0.0;
  std::uint64_t t = 0;
  std::uint64_t steps = 0;
  while (out.size() < count) {
    if (++steps > step_budget)
      throw NumericalError("sprint length " + std::to_string(j) + " unreachable; reduce k or j_max");
    c = std::max(c + sampler.draw(rng) - k, 0.0);
    t = c > 0.0 ? t + 1 : 0;
    if (t == j) {
      out.push_back(c);
      // The chain regenerates at C = 0 and a sprint reaches length j at most
      // once, so restarting here leaves the record distribution unchanged.
      c = 0.0;
      t = 0;
    }
  }
  return out;
}

PreliminaryLimits bootstrap_preliminary_limits(const Sampler& sampler, double k, double alpha_hat,
                                               const CalibrationConfig& cfg) {
  if (!(k >= 0.0)) throw UsageError("bootstrap_preliminary_limits: k must be >= 0");
  if (!(alpha_hat > 0.0 && alpha_hat < 1.0)) throw UsageError("bootstrap_preliminary_limits: alpha_hat must lie in (0, 1)");
  const std::size_t b = cfg.boot_reps;
  const std::size_t horizon = cfg.j_max + 1;
  const std::uint64_t budget = cfg.step_budget_factor * b;
  const std::size_t rank = order_statistic_rank(b, alpha_hat);

  std::vector<double> limits(horizon);
  parallel_for(horizon, cfg.threads, [&](std::size_t idx) {
    auto sample = conditional_cusum_sample(sampler, k, idx + 1, b, derive_seed(cfg.seed, {kTagPrelim, idx}), budget);
    std::ranges::nth_element(sample, sample.begin() + static_cast<std::ptrdiff_t>(rank - 1));
    limits[idx] = sample[rank - 1];
  });

  PreliminaryLimits out;
  out.m_star = limits.back();
  limits.pop_back();
  out.m = std::move(limits);
  out.alpha_hat = alpha_hat;
  out.conditional_counts.assign(horizon, b);
  return out;
}

double simulate_mean_run_length(const Sampler& sampler, const LimitSchedule& schedule, std::size_t reps,
                                std::uint64_t cap, std::uint64_t seed, unsigned threads) {
  std::vector<double> lengths(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, {kTagTune, r}));
    lengths[r] = static_cast<double>(run_length([&] { return sampler.draw(rng); }, schedule, cap).length);
  });
  return std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(reps);
}

LimitSchedule interpolate_limits(const LimitSchedule& low, double rl_low, const LimitSchedule& high, double rl_high,
                                 double arl0) {
  if (!(rl_low < arl0 && arl0 < rl_high)) throw NumericalError("interpolate_limits: brackets do not straddle ARL0");
  if (low.j_max() != high.j_max()) throw UsageError("interpolate_limits: schedules differ in j_max");
  const double w_high = (arl0 - rl_low) / (rl_high - rl_low);
  const double w_low = (rl_high - arl0) / (rl_high - rl_low);
  std::vector<double> h(low.j_max());
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = w_low * low.limits()[j] + w_high * high.limits()[j];
  return LimitSchedule(low.k(), std::move(h), w_low * low.h_star() + w_high * high.h_star());
}

TuneResult tune_limits(const Sampler& sampler, double k, const PreliminaryLimits& prelim,
                       const CalibrationConfig& cfg) {
  cfg.validate();
  if (prelim.m.size() != cfg.j_max) throw UsageError("tune_limits: preliminary limits do not match j_max");
  const LimitSchedule start(k, prelim.m, prelim.m_star);
  const std::uint64_t cap = cfg.effective_cap();
  const std::uint64_t seed = derive_seed(cfg.seed, {kTagTune});
  return tune_family(
      start,
      [&](const LimitSchedule& s, std::uint64_t batch) {
        return simulate_mean_run_length(sampler, s, cfg.tune_reps, cap, batch_seed(seed, batch), cfg.threads);
      },
      [](const LimitSchedule& s, double f) { return s.scaled(f); }, cfg,
      [&](const LimitSchedule& s) { return s.h_star() / start.h_star(); });
}

CalibrationResult calibrate(std::span<const double> phase1, const CalibrationConfig& cfg) {
  cfg.validate();
  if (phase1.size() < kMinPhase1)
    throw DataError("insufficient Phase-I data: " + std::to_string(phase1.size()) + " observations, need at least " +
                    std::to_string(kMinPhase1));
  for (double x : phase1)
    if (!std::isfinite(x)) throw DataError("Phase-I data contain a non-finite value");
  const SampleMoments moments = sample_moments(phase1);
  const std::vector<double> z = normalize(phase1);
  FittedDensity fhat = fit_kde(z, cfg.variance_correction);

  const KSelection sel = select_k(z, cfg);
  const double alpha = estimate_alpha_hat(z, sel.k, cfg.arl0);
  PreliminaryLimits prelim = bootstrap_preliminary_limits(fhat, sel.k, alpha, cfg);
  TuneResult tuned = tune_limits(fhat, sel.k, prelim, cfg);

  LimitSchedule schedule = tuned.schedule;
  return CalibrationResult{std::move(schedule), std::move(fhat), moments, sel, std::move(prelim), std::move(tuned)};
}

KnownCalibration calibrate_known(const DistributionModel& model, const CalibrationConfig& cfg) {
  cfg.validate();
  const KSelection sel = select_k(model, quartile_bounds(model), cfg);
  const double alpha = alpha_from_exceedance(1.0 - model.cdf(sel.k), cfg.arl0);
  PreliminaryLimits prelim = bootstrap_preliminary_limits(model, sel.k, alpha, cfg);
  TuneResult tuned = tune_limits(model, sel.k, prelim, cfg);
  LimitSchedule schedule = tuned.schedule;
  return KnownCalibration{std::move(schedule), sel, std::move(prelim), std::move(tuned)};
}

ReducedSchedule reduce_horizon(const Sampler& sampler, const LimitSchedule& schedule, std::size_t new_j_max,
                               const CalibrationConfig& cfg) {
  if (new_j_max < 1 || new_j_max > schedule.j_max())
    throw UsageError("reduce_horizon: new j_max must lie in [1, current j_max]");
  std::vector<double> kept(schedule.limits().begin(), schedule.limits().begin() + static_cast<std::ptrdiff_t>(new_j_max));
  const LimitSchedule start(schedule.k(), kept, schedule.h_star());
  const std::uint64_t cap = cfg.effective_cap();
  const std::uint64_t seed = derive_seed(cfg.seed, {kTagReduce});
  auto tuned = tune_family(
      start,
      [&](const LimitSchedule& s, std::uint64_t batch) {
        return simulate_mean_run_length(sampler, s, cfg.tune_reps, cap, batch_seed(seed, batch), cfg.threads);
      },
      [](const LimitSchedule& s, double f) {
        return LimitSchedule(s.k(), std::vector<double>(s.limits().begin(), s.limits().end()), s.h_star() * f);
      },
      cfg, [&](const LimitSchedule& s) { return s.h_star() / start.h_star(); });
  return {std::move(tuned.schedule), tuned.achieved_rl, tuned.iterations,
          "sprint-length target no longer matches j_max after reducing the horizon"};
}

}  // namespace bscusum
