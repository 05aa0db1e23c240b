#include "bscusum/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bscusum/error.hpp"

namespace bscusum {

namespace {

constexpr std::size_t kMinCvPoints = 10;
constexpr std::size_t kGridSize = 30;

}  // namespace

SampleMoments sample_moments(std::span<const double> data) {
  if (data.size() < 2) throw DataError("sample moments need at least 2 observations");
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(data.size() - 1))};
}

std::vector<double> normalize(std::span<const double> data) {
  const auto [mean, sd] = sample_moments(data);
  if (!(sd > 0.0)) throw DataError("normalize: data have zero variance");
  std::vector<double> out(data.begin(), data.end());
  for (double& x : out) x = (x - mean) / sd;
  return out;
}

double rule_of_thumb_bandwidth(std::span<const double> data) {
  const auto [mean, sd] = sample_moments(data);
  return 1.06 * sd * std::pow(static_cast<double>(data.size()), -0.2);
}

std::vector<double> default_bandwidth_grid(std::span<const double> data) {
  const double h0 = rule_of_thumb_bandwidth(data);
  if (!(h0 > 0.0)) throw DataError("bandwidth selection: data are degenerate (zero variance)");
  std::vector<double> grid(kGridSize);
  const double lo = std::log(0.1);
  const double hi = std::log(10.0);
  for (std::size_t i = 0; i < kGridSize; ++i)
    grid[i] = h0 * std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kGridSize - 1));
  return grid;
}

double lscv_score(std::span<const double> data, double bandwidth) {
  const std::size_t m = data.size();
  if (m < 2 || !(bandwidth > 0.0)) throw UsageError("lscv_score: need m >= 2 and bandwidth > 0");
  // Pairwise sums over i < j; diagonal terms added in closed form.
  double conv = 0.0;   // sum exp(-d^2 / 4h^2)
  double leave = 0.0;  // sum exp(-d^2 / 2h^2)
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = data[i] - data[j];
      const double e = std::exp(-d * d * inv2h2);
      leave += e;
      conv += std::sqrt(e);
    }
  }
  const double md = static_cast<double>(m);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  // integral fhat^2 = (1 / (m^2 h)) * sum_{i,j} exp(-d^2/4h^2) / (2 sqrt(pi))
  const double int_sq = (md + 2.0 * conv) / (md * md * bandwidth * 2.0 * sqrt_pi);
  // (2/m) sum_i fhat_{-i}(x_i) = (2/m) * 2 * leave / ((m-1) h sqrt(2 pi))
  const double loo = 4.0 * leave / (md * (md - 1.0) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  return int_sq - loo;
}

double cv_bandwidth(std::span<const double> data, std::span<const double> grid) {
  if (data.size() < kMinCvPoints) throw DataError("cv_bandwidth: need at least 10 observations");
  if (grid.empty()) throw UsageError("cv_bandwidth: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw UsageError("cv_bandwidth: grid values must be > 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw UsageError("cv_bandwidth: grid must be increasing");
  }
  const auto [lo, hi] = std::ranges::minmax(data);
  if (lo == hi) throw DataError("cv_bandwidth: data are degenerate (all values equal)");
  if (grid.size() == 1) return grid[0];

  // Precompute squared pairwise distances once; every grid point reuses them.
  const std::size_t m = data.size();
  std::vector<double> d2;
  d2.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) d2.push_back((data[i] - data[j]) * (data[i] - data[j]));

  const double md = static_cast<double>(m);
  double best_h = grid[0];
  double best_score = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double h = grid[g];
    const double inv2h2 = 1.0 / (2.0 * h * h);
    double conv = 0.0;
    double leave = 0.0;
    for (double v : d2) {
      const double e = std::exp(-v * inv2h2);
      leave += e;
      conv += std::sqrt(e);
    }
    const double int_sq = (md + 2.0 * conv) / (md * md * h * 2.0 * std::sqrt(std::numbers::pi));
    const double loo = 4.0 * leave / (md * (md - 1.0) * h * std::sqrt(2.0 * std::numbers::pi));
    const double score = int_sq - loo;
    if (g == 0 || score < best_score) {
      best_score = score;
      best_h = h;
    }
  }
  return best_h;
}

FittedDensity::FittedDensity(std::vector<double> points, double bandwidth, bool variance_corrected)
    : points_(std::move(points)), bandwidth_(bandwidth), variance_corrected_(variance_corrected) {
  if (points_.size() < 2) throw DataError("FittedDensity: need at least 2 points");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) throw UsageError("FittedDensity: bandwidth must be > 0");
  const auto moments = sample_moments(points_);
  mean_ = moments.mean;
  sd_ = moments.sd;
  if (!(sd_ > 0.0)) throw DataError("FittedDensity: data have zero variance");
  factor_ = 1.0;
  if (variance_corrected_) {
    // Resampling variance uses the 1/m divisor; the target is the n-1 sample variance.
    const double md = static_cast<double>(points_.size());
    const double pop_var = sd_ * sd_ * (md - 1.0) / md;
    factor_ = std::sqrt(sd_ * sd_ / (pop_var + bandwidth_ * bandwidth_));
  }
}

double FittedDensity::draw(Rng& rng) const {
  const double x = points_[rng.below(points_.size())] + bandwidth_ * rng.normal();
  return variance_corrected_ ? mean_ + factor_ * (x - mean_) : x;
}

double FittedDensity::density(double x) const noexcept {
  // Undo the affine correction: y = mean + factor * (x_raw - mean).
  const double raw = mean_ + (x - mean_) / factor_;
  const double norm = 1.0 / (static_cast<double>(points_.size()) * bandwidth_ * std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (double p : points_) {
    const double u = (raw - p) / bandwidth_;
    sum += std::exp(-0.5 * u * u);
  }
  return sum * norm / factor_;
}

double FittedDensity::cdf(double x) const noexcept {
  const double raw = mean_ + (x - mean_) / factor_;
  double sum = 0.0;
  for (double p : points_) sum += 0.5 * std::erfc(-(raw - p) / (bandwidth_ * std::numbers::sqrt2));
  return sum / static_cast<double>(points_.size());
}

FittedDensity fit_kde(std::span<const double> data, bool variance_corrected) {
  if (data.size() < kMinCvPoints) throw DataError("fit_kde: need at least 10 observations");
  const auto grid = default_bandwidth_grid(data);
  const double h = cv_bandwidth(data, grid);
  return FittedDensity(std::vector<double>(data.begin(), data.end()), h, variance_corrected);
}

EmpiricalSampler::EmpiricalSampler(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("EmpiricalSampler: no values to resample");
}

}  // namespace bscusum
