#include "bscusum/monitor.hpp"

#include <cmath>

#include "bscusum/error.hpp"

namespace bscusum {

Monitor::Monitor(LimitSchedule schedule, std::optional<ArModel> ar_model, bool continue_after_signal, double center,
                 double scale)
    : schedule_(std::move(schedule)), continue_(continue_after_signal), center_(center), scale_(scale) {
  if (!std::isfinite(center) || !(scale > 0.0) || !std::isfinite(scale))
    throw UsageError("Monitor: center must be finite and scale positive");
  if (ar_model) filter_.emplace(std::move(*ar_model));
}

std::optional<Monitor::Step> Monitor::push(double x) {
  if (stopped_) return std::nullopt;
  ++observations_;
  double value = x;
  if (filter_) {
    const auto e = filter_->push(x);
    if (!e) return std::nullopt;
    value = *e;
  }
  value = (value - center_) / scale_;
  state_ = cusum_step(state_, value, schedule_.k());
  const bool signal = signal_check(state_, schedule_);
  Step step{observations_, state_.n, x, value, state_.c, state_.t,
            state_.t > 0 ? schedule_.limit_for(state_.t) : 0.0, signal};
  if (signal) {
    signals_.push_back(step);
    if (continue_)
      state_ = CusumState{};
    else
      stopped_ = true;
  }
  return step;
}

}  // namespace bscusum
