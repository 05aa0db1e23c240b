#include "bscusum/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "bscusum/baselines.hpp"
#include "bscusum/calibration.hpp"
#include "bscusum/density.hpp"
#include "bscusum/error.hpp"
#include "bscusum/parallel.hpp"

namespace bscusum {

namespace {

constexpr std::uint64_t kTagReference = 11;
constexpr std::uint64_t kTagData = 12;
constexpr std::uint64_t kTagBoot = 13;
constexpr std::uint64_t kTagPhase1 = 21;
constexpr std::uint64_t kTagPhase2 = 22;
constexpr std::uint64_t kTagCalibrate = 23;

double ks_lambda(double d, double ne) {
  const double s = std::sqrt(ne);
  return (s + 0.12 + 0.11 / s) * d;
}

bool is_bootstrap(Method m) { return m == Method::B1 || m == Method::B2 || m == Method::B3; }

std::string_view case_label(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::StandardNormal: return "I";
    case DistributionKind::RightSkewMix: return "II";
    case DistributionKind::LeftSkewMix: return "III";
  }
  return "?";
}

}  // namespace

double kolmogorov_sf(double lambda) noexcept {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= lambda) = sqrt(2 pi) / lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 8; ++j) sum += std::exp(-static_cast<double>((2 * j - 1) * (2 * j - 1)) * w);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw UsageError("ks_two_sample: both samples need at least 2 values");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::ranges::sort(x);
  std::ranges::sort(y);
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {d, kolmogorov_sf(ks_lambda(d, nx * ny / (nx + ny)))};
}

double ks_uniform(std::span<const double> pvals) {
  if (pvals.empty()) throw UsageError("ks_uniform: no values");
  std::vector<double> x(pvals.begin(), pvals.end());
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("ks_uniform: values must lie in [0, 1]");
  std::ranges::sort(x);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fi = static_cast<double>(i);
    d = std::max({d, (fi + 1.0) / n - x[i], x[i] - fi / n});
  }
  return kolmogorov_sf(ks_lambda(d, n));
}

double paired_comparison(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw UsageError("paired_comparison: need equal lengths >= 2");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  if (ss == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  const double t = mean / se;
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

ValidityResult bootstrap_validity_study(const ValidityConfig& cfg) {
  if (cfg.max_j < 1 || cfg.replications < 2 || cfg.boot_reps < 2 || cfg.reference_reps < 2 || cfg.series_length < 2)
    throw UsageError("bootstrap_validity_study: sizes too small");
  const DistributionModel normal(DistributionKind::StandardNormal);
  const std::uint64_t budget = 10'000ULL * std::max(cfg.boot_reps, cfg.reference_reps);

  std::vector<std::vector<double>> reference(cfg.max_j);
  parallel_for(cfg.max_j, cfg.threads, [&](std::size_t j) {
    reference[j] = conditional_cusum_sample(normal, cfg.k, j + 1, cfg.reference_reps,
                                            derive_seed(cfg.seed, {kTagReference, j}), budget);
  });

  ValidityResult out;
  out.replicate_p.assign(cfg.max_j, std::vector<double>(cfg.replications));
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
    EmpiricalSampler data(sample_stream(normal, {}, cfg.series_length, derive_seed(cfg.seed, {kTagData, i})));
    for (std::size_t j = 0; j < cfg.max_j; ++j) {
      const auto boot =
          conditional_cusum_sample(data, cfg.k, j + 1, cfg.boot_reps, derive_seed(cfg.seed, {kTagBoot, i, j}), budget);
      out.replicate_p[j][i] = ks_two_sample(reference[j], boot).p;
    }
  });
  for (const auto& column : out.replicate_p) out.uniformity_p.push_back(ks_uniform(column));
  return out;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::C: return "C";
    case Method::NP1: return "NP1";
    case Method::NP2: return "NP2";
    case Method::B1: return "B1";
    case Method::B2: return "B2";
    case Method::B3: return "B3";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::C, Method::NP1, Method::NP2, Method::B1, Method::B2, Method::B3})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

double sprint_fraction(Method m) {
  switch (m) {
    case Method::B1: return 0.5;
    case Method::B2: return 0.75;
    case Method::B3: return 1.0;
    default: break;
  }
  throw UsageError("sprint_fraction: not a bootstrap method");
}

void ExperimentConfig::validate() const {
  if (!(delta >= 0.0)) throw UsageError("experiment: delta must be >= 0");
  if (m < 100 && !known_f) throw UsageError("experiment: Phase-I size must be >= 100");
  if (reps < 2) throw UsageError("experiment: need at least 2 replications");
  if (j_max < 1) throw UsageError("experiment: j_max must be >= 1");
  if (!(arl0 > 1.0)) throw UsageError("experiment: arl0 must exceed 1");
}

const MethodResult& ArlTable::row(Method m) const {
  for (const auto& r : rows)
    if (r.method == m) return r;
  throw UsageError("ArlTable: method " + std::string(to_string(m)) + " not in table");
}

ArlTable arl_table(const ExperimentConfig& cfg, std::span<const Method> methods) {
  cfg.validate();
  if (methods.empty()) throw UsageError("arl_table: no methods requested");
  const DistributionModel f(cfg.kind);
  const std::uint64_t cap = cfg.cap > 0 ? cfg.cap : static_cast<std::uint64_t>(std::ceil(50.0 * cfg.arl0));
  const double classical_k = cfg.classical_k.value_or(0.5 * cfg.delta);
  const bool need_h = std::ranges::find(methods, Method::C) != methods.end();
  const double h_classical = need_h ? classical_h(classical_k, cfg.arl0, cfg.threads) : 0.0;

  auto calibration_config = [&](Method m, std::uint64_t seed, unsigned threads) {
    CalibrationConfig c;
    c.arl0 = cfg.arl0;
    c.j_max = cfg.j_max;
    c.target_sprint = sprint_fraction(m) * static_cast<double>(cfg.j_max);
    c.boot_reps = cfg.boot_reps;
    c.tune_reps = cfg.tune_reps;
    c.seed = seed;
    c.threads = threads;
    return c;
  };

  // Known F: one calibration per method, shared by every replication.
  std::vector<std::optional<LimitSchedule>> known_schedules(methods.size());
  if (cfg.known_f) {
    for (std::size_t q = 0; q < methods.size(); ++q) {
      if (!is_bootstrap(methods[q])) continue;
      const auto cal = calibrate_known(
          f, calibration_config(methods[q], derive_seed(cfg.seed, {kTagCalibrate, q}), cfg.threads));
      known_schedules[q] = cal.schedule;
    }
  }

  ArlTable table{cfg, {}};
  for (Method m : methods) table.rows.push_back({m, {}, std::vector<RunOutcome>(cfg.reps), {}});
  std::vector<std::vector<double>> ks(methods.size(), std::vector<double>(cfg.reps, 0.0));
  const unsigned inner_threads = 1;

  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    const std::uint64_t phase2_seed = derive_seed(cfg.seed, {kTagPhase2, r});
    std::vector<double> phase1;
    SampleMoments moments{0.0, 1.0};
    if (!cfg.known_f) {
      phase1 = sample_stream(f, {}, cfg.m, derive_seed(cfg.seed, {kTagPhase1, r}));
      moments = sample_moments(phase1);
    }
    for (std::size_t q = 0; q < methods.size(); ++q) {
      StreamGenerator stream(f, ShiftSpec{cfg.delta, 0}, phase2_seed);
      auto next = [&] { return stream.next(); };
      RunOutcome outcome;
      switch (methods[q]) {
        case Method::C:
          outcome = classical_run(next, ClassicalParams{classical_k, h_classical, moments.mean, moments.sd}, cap);
          ks[q][r] = classical_k;
          break;
        case Method::NP1: outcome = np_cusum_run(next, NpCusumParams{10, 13.0, 24.0}, cap); break;
        case Method::NP2: outcome = np_cusum_run(next, NpCusumParams{10, 21.0, 14.0}, cap); break;
        case Method::B1:
        case Method::B2:
        case Method::B3: {
          if (cfg.known_f) {
            outcome = run_length(next, *known_schedules[q], cap);
            ks[q][r] = known_schedules[q]->k();
          } else {
            const auto cal = calibrate(
                phase1, calibration_config(methods[q], derive_seed(cfg.seed, {kTagCalibrate, r, q}), inner_threads));
            auto standardized = [&] { return (stream.next() - cal.phase1.mean) / cal.phase1.sd; };
            outcome = run_length(standardized, cal.schedule, cap);
            ks[q][r] = cal.k_selection.k;
          }
          break;
        }
      }
      table.rows[q].runs[r] = outcome;
    }
  });

  for (std::size_t q = 0; q < methods.size(); ++q) {
    auto& row = table.rows[q];
    row.summary = summarize_runs(std::span<const RunOutcome>(row.runs));
    if (cfg.known_f && is_bootstrap(row.method))
      row.k_values = {known_schedules[q]->k()};
    else if (row.method != Method::NP1 && row.method != Method::NP2)
      row.k_values = std::move(ks[q]);
  }
  return table;
}

void write_table(std::ostream& out, const ArlTable& table) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << "method\tarl\tse\treps\ttruncated\n" << std::fixed << std::setprecision(2);
  for (const auto& row : table.rows)
    out << to_string(row.method) << '\t' << row.summary.mean << '\t' << row.summary.se << '\t' << row.summary.reps
        << '\t' << row.summary.truncated << '\n';
  out.flags(old_flags);
  out.precision(old_precision);
}

void write_long_format(std::ostream& out, std::span<const ArlTable> tables, bool header) {
  const auto old_precision = out.precision();
  if (header) out << "case,method,delta,j_max,arl,se,reps\n";
  out << std::setprecision(17);
  for (const auto& table : tables)
    for (const auto& row : table.rows)
      out << case_label(table.config.kind) << ',' << to_string(row.method) << ',' << table.config.delta << ','
          << table.config.j_max << ',' << row.summary.mean << ',' << row.summary.se << ',' << row.summary.reps << '\n';
  out.precision(old_precision);
}

}  // namespace bscusum
