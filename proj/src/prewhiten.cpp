#include "bscusum/prewhiten.hpp"

#include <cmath>
#include <string>

#include "bscusum/error.hpp"

namespace bscusum {

std::vector<double> autocovariances(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n == 0 || max_lag >= n) throw UsageError("autocovariances: series too short for the requested lag");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (series[i] - mean) * (series[i + lag] - mean);
    gamma[lag] = s / static_cast<double>(n);
  }
  return gamma;
}

LevinsonResult levinson_durbin(std::span<const double> gamma, std::size_t order) {
  if (gamma.size() < order + 1) throw UsageError("levinson_durbin: need autocovariances up to lag order");
  if (!(gamma[0] > 0.0)) throw DataError("levinson_durbin: singular autocovariance matrix (zero variance)");
  LevinsonResult out{{}, gamma[0], {}};
  std::vector<double> a;
  for (std::size_t m = 1; m <= order; ++m) {
    double acc = gamma[m];
    for (std::size_t j = 1; j < m; ++j) acc -= a[j - 1] * gamma[m - j];
    const double kappa = acc / out.noise_var;
    std::vector<double> next(m);
    for (std::size_t j = 1; j < m; ++j) next[j - 1] = a[j - 1] - kappa * a[m - j - 1];
    next[m - 1] = kappa;
    a = std::move(next);
    out.noise_var *= (1.0 - kappa * kappa);
    out.reflection.push_back(kappa);
    if (!(out.noise_var > 0.0) || !(std::abs(kappa) < 1.0))
      throw DataError("levinson_durbin: singular autocovariance matrix at order " + std::to_string(m));
  }
  out.coeffs = std::move(a);
  return out;
}

ArModel yule_walker_fit(std::span<const double> series, std::size_t order) {
  const std::size_t n = series.size();
  if (n < 2 || n <= 10 * order) throw DataError("yule_walker_fit: series length must exceed 10 * order");
  const auto gamma = autocovariances(series, order);
  auto lev = levinson_durbin(gamma, order);
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  return ArModel{mean, order, std::move(lev.coeffs), lev.noise_var};
}

std::size_t select_order_aic(std::span<const double> series, std::size_t max_order) {
  const std::size_t n = series.size();
  if (n < 2 || n <= 10 * max_order) throw DataError("select_order_aic: series too short for max_order");
  const auto gamma = autocovariances(series, max_order);
  if (!(gamma[0] > 0.0)) throw DataError("select_order_aic: series has zero variance");
  // One Levinson pass yields every order's innovation variance.
  const auto lev = levinson_durbin(gamma, max_order);
  const double nd = static_cast<double>(n);
  std::size_t best = 0;
  double var = gamma[0];
  double best_aic = nd * std::log(var);
  for (std::size_t r = 1; r <= max_order; ++r) {
    var *= 1.0 - lev.reflection[r - 1] * lev.reflection[r - 1];
    const double aic = nd * std::log(var) + 2.0 * static_cast<double>(r);
    if (aic < best_aic) {
      best_aic = aic;
      best = r;
    }
  }
  return best;
}

std::vector<double> residuals(std::span<const double> series, const ArModel& model) {
  const std::size_t r = model.order;
  if (model.coeffs.size() != r) throw UsageError("residuals: coefficient count does not match the order");
  if (series.size() <= r) throw DataError("residuals: series must be longer than the AR order");
  std::vector<double> out(series.size() - r);
  for (std::size_t i = r; i < series.size(); ++i) {
    double e = series[i] - model.mu;
    for (std::size_t j = 1; j <= r; ++j) e -= model.coeffs[j - 1] * (series[i - j] - model.mu);
    out[i - r] = e;
  }
  return out;
}

bool is_stationary(std::span<const double> coeffs) {
  // Step-down (inverse Levinson) recursion.
  std::vector<double> a(coeffs.begin(), coeffs.end());
  for (std::size_t m = a.size(); m >= 1; --m) {
    const double kappa = a[m - 1];
    if (!(std::abs(kappa) < 1.0)) return false;
    const double denom = 1.0 - kappa * kappa;
    std::vector<double> prev(m - 1);
    for (std::size_t j = 1; j < m; ++j) prev[j - 1] = (a[j - 1] + kappa * a[m - j - 1]) / denom;
    a = std::move(prev);
  }
  return true;
}

ResidualFilter::ResidualFilter(ArModel model) : model_(std::move(model)) {
  if (model_.coeffs.size() != model_.order) throw UsageError("ResidualFilter: coefficient count does not match the order");
}

std::optional<double> ResidualFilter::push(double x) {
  const double centered = x - model_.mu;
  std::optional<double> out;
  if (history_.size() == model_.order) {
    double e = centered;
    for (std::size_t j = 0; j < model_.order; ++j) e -= model_.coeffs[j] * history_[j];
    out = e;
  }
  if (model_.order > 0) {
    history_.push_front(centered);
    if (history_.size() > model_.order) history_.pop_back();
  }
  return out;
}

}  // namespace bscusum
