#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bscusum/cusum.hpp"
#include "bscusum/prewhiten.hpp"

namespace bscusum {

inline constexpr int kScheduleFormatVersion = 1;

/// On-disk form of a calibrated schedule: `key = value` lines, '#' comments,
/// numbers written with 17 significant digits so parsing is lossless.
struct ScheduleFile {
  int format_version = kScheduleFormatVersion;
  double center = 0.0;  // monitored values are standardized as (value - center) / scale
  double scale = 1.0;
  double k = 0.0;
  std::vector<double> limits;
  double h_star = 0.0;
  double arl0 = 0.0;
  std::uint64_t created_with_seed = 0;
  std::uint64_t phase1_fingerprint = 0;
  std::optional<ArModel> ar_model;  // present when the chart monitors AR residuals

  std::size_t j_max() const noexcept { return limits.size(); }
  LimitSchedule schedule() const { return LimitSchedule(k, limits, h_star); }
};

bool operator==(const ScheduleFile& a, const ScheduleFile& b);

/// FNV-1a over the IEEE-754 bit patterns of the values.
std::uint64_t fingerprint(std::span<const double> values) noexcept;

std::string render_schedule(const ScheduleFile& file);
ScheduleFile parse_schedule(std::string_view text);

void write_schedule_file(const std::filesystem::path& path, const ScheduleFile& file);
ScheduleFile read_schedule_file(const std::filesystem::path& path);

}  // namespace bscusum
