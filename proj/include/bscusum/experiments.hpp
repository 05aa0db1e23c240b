#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bscusum/cusum.hpp"
#include "bscusum/distributions.hpp"

namespace bscusum {

struct KsResult {
  double d;
  double p;
};

/// Limiting Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_sf(double lambda) noexcept;

/// Two-sample KS statistic; p from the asymptotic distribution evaluated at
/// (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * D with ne = n*m / (n+m).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample KS p-value of values in [0, 1] against Uniform(0, 1).
double ks_uniform(std::span<const double> pvals);

/// Two-sided paired t-test on a - b. All-zero differences give p = 1; a
/// nonzero constant difference gives p = 0.
double paired_comparison(std::span<const double> a, std::span<const double> b);

/// Bootstrap validity study on N(0, 1): compares [C | T = j] from direct
/// simulation with its bootstrap counterpart from resampled data.
struct ValidityConfig {
  std::size_t series_length = 10'000;   // n
  double k = 0.5;
  std::size_t max_j = 10;
  std::size_t reference_reps = 10'000;  // direct-simulation draws per j
  std::size_t replications = 200;       // I
  std::size_t boot_reps = 500;          // B
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct ValidityResult {
  std::vector<double> uniformity_p;             // one per j
  std::vector<std::vector<double>> replicate_p; // [j][replication]
};

ValidityResult bootstrap_validity_study(const ValidityConfig& cfg);

enum class Method { C, NP1, NP2, B1, B2, B3 };

std::string_view to_string(Method m) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;
/// E[T_n] / j_max for the bootstrap methods (0.5, 0.75, 1.0).
double sprint_fraction(Method m);

struct ExperimentConfig {
  DistributionKind kind = DistributionKind::StandardNormal;
  double delta = 0.0;
  std::size_t m = 1000;        // Phase-I size
  std::size_t reps = 100;      // I
  std::size_t j_max = 50;
  double arl0 = 200.0;
  std::uint64_t seed = 1;
  std::size_t boot_reps = 2000;
  std::size_t tune_reps = 100;
  bool known_f = false;        // bootstrap from F itself; classical chart uses mu = 0, sigma = 1
  std::optional<double> classical_k;  // defaults to delta / 2
  std::uint64_t cap = 0;       // 0 means 50 * arl0
  unsigned threads = 0;

  void validate() const;
};

struct MethodResult {
  Method method;
  RunLengthSummary summary;
  std::vector<RunOutcome> runs;
  std::vector<double> k_values;  // allowance used per replication (one entry in known-F mode)
};

struct ArlTable {
  ExperimentConfig config;
  std::vector<MethodResult> rows;

  const MethodResult& row(Method m) const;
};

/// Paired design: replication r feeds the same Phase-II stream to every method.
ArlTable arl_table(const ExperimentConfig& cfg, std::span<const Method> methods);

/// Tab-separated table: method, arl, se, reps, truncated.
void write_table(std::ostream& out, const ArlTable& table);
/// Long format: case, method, delta, j_max, arl, se, reps.
void write_long_format(std::ostream& out, std::span<const ArlTable> tables, bool header = true);

}  // namespace bscusum
