#pragma once

#include <span>
#include <vector>

#include "bscusum/sampler.hpp"

namespace bscusum {

/// Sample mean and SD with the n - 1 divisor.
struct SampleMoments {
  double mean;
  double sd;
};
SampleMoments sample_moments(std::span<const double> data);

/// (x - mean) / sd using sample moments. Throws DataError on zero variance.
std::vector<double> normalize(std::span<const double> data);

/// Silverman's rule of thumb 1.06 * sd * m^(-1/5).
double rule_of_thumb_bandwidth(std::span<const double> data);

/// 30 log-spaced bandwidths spanning [0.1, 10] x rule of thumb.
std::vector<double> default_bandwidth_grid(std::span<const double> data);

/// Least-squares cross-validation score of a Gaussian KDE:
///   integral(fhat^2) - (2/m) * sum_i fhat_{-i}(x_i).
double lscv_score(std::span<const double> data, double bandwidth);

/// Grid value minimizing lscv_score (first one on ties).
double cv_bandwidth(std::span<const double> data, std::span<const double> grid);

/// Gaussian kernel density estimate of Phase-I data, sampleable by the
/// smoothed bootstrap. With variance correction on, draws are shrunk about
/// the sample mean so their variance equals the sample variance, and
/// density()/cdf() describe that corrected distribution.
class FittedDensity final : public Sampler {
 public:
  FittedDensity(std::vector<double> points, double bandwidth, bool variance_corrected = true);

  std::span<const double> points() const noexcept { return points_; }
  double bandwidth() const noexcept { return bandwidth_; }
  double sample_mean() const noexcept { return mean_; }
  double sample_sd() const noexcept { return sd_; }
  bool variance_corrected() const noexcept { return variance_corrected_; }
  /// Shrink factor applied about the mean (1 when uncorrected).
  double correction_factor() const noexcept { return factor_; }

  /// Pick a point uniformly, add bandwidth * N(0,1), then apply the correction.
  double draw(Rng& rng) const override;
  double density(double x) const noexcept;
  double cdf(double x) const noexcept;

  FittedDensity with_variance_correction(bool on) const { return FittedDensity(points_, bandwidth_, on); }

 private:
  std::vector<double> points_;
  double bandwidth_;
  double mean_;
  double sd_;
  bool variance_corrected_;
  double factor_;
};

inline double smoothed_draw(const FittedDensity& density, Rng& rng) { return density.draw(rng); }

/// Gaussian KDE with the LSCV-selected bandwidth from default_bandwidth_grid.
FittedDensity fit_kde(std::span<const double> data, bool variance_corrected = true);

/// Plain (unsmoothed) bootstrap: uniform resampling of the stored values.
class EmpiricalSampler final : public Sampler {
 public:
  explicit EmpiricalSampler(std::vector<double> values);
  double draw(Rng& rng) const override { return values_[rng.below(values_.size())]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

}  // namespace bscusum
