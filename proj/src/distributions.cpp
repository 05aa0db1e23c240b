#include "bscusum/distributions.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "bscusum/error.hpp"

namespace bscusum {

namespace {

// Unstandardized RightSkewMix: 0.5 * Exp(scale 3) on [0, inf), 0.5 * (-Exp(scale 1)) on (-inf, 0).
constexpr double kRightScale = 3.0;
constexpr double kLeftScale = 1.0;
constexpr double kMixMean = 0.5 * kRightScale - 0.5 * kLeftScale;  // 1
// E[X^2] = 0.5 * 2 * 3^2 + 0.5 * 2 * 1^2 = 10, so the variance is 10 - 1 = 9.
constexpr double kMixSd = 3.0;

double right_raw_density(double x) noexcept {
  return x >= 0.0 ? 0.5 / kRightScale * std::exp(-x / kRightScale) : 0.5 / kLeftScale * std::exp(x / kLeftScale);
}

double right_raw_cdf(double x) noexcept {
  return x >= 0.0 ? 1.0 - 0.5 * std::exp(-x / kRightScale) : 0.5 * std::exp(x / kLeftScale);
}

double right_raw_quantile(double p) noexcept {
  return p < 0.5 ? kLeftScale * std::log(2.0 * p) : -kRightScale * std::log(2.0 * (1.0 - p));
}

double right_raw_draw(Rng& rng) noexcept {
  // Branch pick, then inverse-CDF on the chosen exponential.
  return rng.uniform() < 0.5 ? kRightScale * rng.exponential() : -kLeftScale * rng.exponential();
}

double phi(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

std::string_view to_string(DistributionKind kind) noexcept {
  switch (kind) {
    case DistributionKind::StandardNormal: return "StandardNormal";
    case DistributionKind::RightSkewMix: return "RightSkewMix";
    case DistributionKind::LeftSkewMix: return "LeftSkewMix";
  }
  return "unknown";
}

MomentPair standardization_constants(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::RightSkewMix: return {kMixMean, kMixSd};
    case DistributionKind::LeftSkewMix: return {-kMixMean, kMixSd};
    case DistributionKind::StandardNormal: break;
  }
  throw UsageError("standardization_constants: StandardNormal is already standardized");
}

double raw_density(DistributionKind kind, double x) noexcept {
  switch (kind) {
    case DistributionKind::StandardNormal: return phi(x);
    case DistributionKind::RightSkewMix: return right_raw_density(x);
    case DistributionKind::LeftSkewMix: return right_raw_density(-x);
  }
  return 0.0;
}

DistributionModel::DistributionModel(DistributionKind kind, double shift) : kind_(kind), shift_(shift) {
  if (!std::isfinite(shift)) throw UsageError("DistributionModel: shift must be finite");
}

double DistributionModel::draw(Rng& rng) const {
  switch (kind_) {
    case DistributionKind::StandardNormal: return rng.normal() + shift_;
    case DistributionKind::RightSkewMix: return (right_raw_draw(rng) - kMixMean) / kMixSd + shift_;
    case DistributionKind::LeftSkewMix: return -(right_raw_draw(rng) - kMixMean) / kMixSd + shift_;
  }
  return 0.0;
}

double DistributionModel::density(double x) const noexcept {
  const double z = x - shift_;
  switch (kind_) {
    case DistributionKind::StandardNormal: return phi(z);
    case DistributionKind::RightSkewMix: return kMixSd * right_raw_density(kMixMean + kMixSd * z);
    case DistributionKind::LeftSkewMix: return kMixSd * right_raw_density(kMixMean - kMixSd * z);
  }
  return 0.0;
}

double DistributionModel::cdf(double x) const noexcept {
  const double z = x - shift_;
  switch (kind_) {
    case DistributionKind::StandardNormal: return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    case DistributionKind::RightSkewMix: return right_raw_cdf(kMixMean + kMixSd * z);
    case DistributionKind::LeftSkewMix: return 1.0 - right_raw_cdf(kMixMean - kMixSd * z);
  }
  return 0.0;
}

double DistributionModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("quantile: probability must lie in (0, 1)");
  switch (kind_) {
    case DistributionKind::StandardNormal:
      return boost::math::quantile(boost::math::normal_distribution<double>{}, p) + shift_;
    case DistributionKind::RightSkewMix: return (right_raw_quantile(p) - kMixMean) / kMixSd + shift_;
    case DistributionKind::LeftSkewMix: return -(right_raw_quantile(1.0 - p) - kMixMean) / kMixSd + shift_;
  }
  return 0.0;
}

StreamGenerator::StreamGenerator(const DistributionModel& model, ShiftSpec spec, std::uint64_t seed)
    : model_(model), spec_(spec), rng_(seed) {
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) throw UsageError("ShiftSpec: delta must be >= 0");
}

double StreamGenerator::next() noexcept {
  ++produced_;
  const double x = model_.draw(rng_);
  return produced_ > spec_.change_point ? x + spec_.delta : x;
}

std::vector<double> sample_stream(const DistributionModel& model, ShiftSpec spec, std::size_t length,
                                  std::uint64_t seed) {
  if (length == 0) throw UsageError("sample_stream: length must be >= 1");
  StreamGenerator gen(model, spec, seed);
  std::vector<double> out(length);
  for (auto& v : out) v = gen.next();
  return out;
}

}  // namespace bscusum
