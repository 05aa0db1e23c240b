#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace bscusum {

/// x(i) - mu = sum_j coeffs[j-1] * (x(i-j) - mu) + e(i), Var e = noise_var.
struct ArModel {
  double mu = 0.0;
  std::size_t order = 0;
  std::vector<double> coeffs;
  double noise_var = 0.0;
};

/// Biased (divide-by-n) sample autocovariances at lags 0..max_lag.
std::vector<double> autocovariances(std::span<const double> series, std::size_t max_lag);

struct LevinsonResult {
  std::vector<double> coeffs;
  double noise_var;
  std::vector<double> reflection;  // partial autocorrelations 1..order
};

/// Solves the Toeplitz Yule-Walker system for the given autocovariances.
/// Throws DataError when the autocovariance matrix is singular.
LevinsonResult levinson_durbin(std::span<const double> gamma, std::size_t order);

ArModel yule_walker_fit(std::span<const double> series, std::size_t order);

/// AIC(r) = n log(noise_var(r)) + 2r over r = 0..max_order; ties go to the smaller r.
std::size_t select_order_aic(std::span<const double> series, std::size_t max_order);

/// e(i) for i > order; the first `order` observations are dropped.
std::vector<double> residuals(std::span<const double> series, const ArModel& model);

/// True when every root of the AR polynomial lies outside the unit circle
/// (step-down recursion: all reflection coefficients strictly inside (-1, 1)).
bool is_stationary(std::span<const double> coeffs);

/// Streaming residuals: the first `order` pushes fill the history and yield nothing.
class ResidualFilter {
 public:
  explicit ResidualFilter(ArModel model);
  std::optional<double> push(double x);
  const ArModel& model() const noexcept { return model_; }

 private:
  ArModel model_;
  std::deque<double> history_;  // most recent first, centered
};

}  // namespace bscusum
