#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bscusum/cusum.hpp"
#include "bscusum/prewhiten.hpp"

namespace bscusum {

/// Single-pass Phase-II monitoring with an optional AR pre-whitening stage.
class Monitor {
 public:
  struct Step {
    std::uint64_t observation;  // 1-based index in the input stream
    std::uint64_t n;            // CUSUM time (counts monitored values since the last restart)
    double x;                   // raw observation
    double value;               // standardized value fed to the CUSUM (residual when pre-whitening)
    double c;
    std::uint64_t t;
    double limit;               // limit in force at this step; 0 while the CUSUM is at zero
    bool signal;
  };

  /// The CUSUM sees (value - center) / scale, where value is x or its AR residual.
  Monitor(LimitSchedule schedule, std::optional<ArModel> ar_model = std::nullopt, bool continue_after_signal = false,
          double center = 0.0, double scale = 1.0);

  /// Feeds one observation. Returns nullopt while the AR history fills and
  /// after a signal when continuation is off.
  std::optional<Step> push(double x);

  bool stopped() const noexcept { return stopped_; }
  std::uint64_t observations() const noexcept { return observations_; }
  std::size_t warmup() const noexcept { return filter_ ? filter_->model().order : 0; }
  const std::vector<Step>& signals() const noexcept { return signals_; }

 private:
  LimitSchedule schedule_;
  std::optional<ResidualFilter> filter_;
  bool continue_;
  double center_;
  double scale_;
  CusumState state_;
  std::uint64_t observations_ = 0;
  bool stopped_ = false;
  std::vector<Step> signals_;
};

}  // namespace bscusum
