#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "bscusum/rng.hpp"
#include "bscusum/sampler.hpp"

namespace bscusum {

/// The three in-control shapes used in the run-length studies.
///   StandardNormal  N(0, 1)
///   RightSkewMix    equal mixture of Exp(scale 3) on x >= 0 and -Exp(scale 1) on x < 0
///   LeftSkewMix     mirror image of RightSkewMix
/// The skew mixtures are standardized to mean 0 and variance 1 before use.
enum class DistributionKind { StandardNormal, RightSkewMix, LeftSkewMix };

std::string_view to_string(DistributionKind kind) noexcept;

struct MomentPair {
  double mean;
  double sd;
};

/// Mean and SD of the unstandardized skew mixture. Throws UsageError for
/// StandardNormal, which needs no standardization.
MomentPair standardization_constants(DistributionKind kind);

/// Density of the unstandardized mixture (e.g. 1/6 at 0+ and 1/2 at 0- for RightSkewMix).
/// For StandardNormal this is just the normal density.
double raw_density(DistributionKind kind, double x) noexcept;

/// Standardized distribution F of the given kind, translated by `shift`.
class DistributionModel final : public Sampler {
 public:
  explicit DistributionModel(DistributionKind kind, double shift = 0.0);

  DistributionKind kind() const noexcept { return kind_; }
  double shift() const noexcept { return shift_; }

  double draw(Rng& rng) const override;
  double density(double x) const noexcept;
  double cdf(double x) const noexcept;
  double quantile(double p) const;

  /// Same shape, different location.
  DistributionModel shifted(double delta) const { return DistributionModel(kind_, shift_ + delta); }

 private:
  DistributionKind kind_;
  double shift_;
};

inline double density_at(const DistributionModel& model, double x) noexcept { return model.density(x); }

/// Sustained step change: observations 1..change_point come from F and the
/// rest from F shifted by delta.
struct ShiftSpec {
  double delta = 0.0;
  std::uint64_t change_point = 0;
};

/// Lazily generated Phase-II stream; pulls one value per call.
class StreamGenerator {
 public:
  StreamGenerator(const DistributionModel& model, ShiftSpec spec, std::uint64_t seed);

  double next() noexcept;
  std::uint64_t produced() const noexcept { return produced_; }

 private:
  DistributionModel model_;
  ShiftSpec spec_;
  Rng rng_;
  std::uint64_t produced_ = 0;
};

/// Materializes `length` values of a StreamGenerator.
std::vector<double> sample_stream(const DistributionModel& model, ShiftSpec spec, std::size_t length,
                                  std::uint64_t seed);

}  // namespace bscusum
