#pragma once

#include "vts/common.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vts::analysis {

struct OffsetSample {
  double t_s = 0.0;
  double offset_ns = 0.0;
};

/// Time-ordered offsets (strictly increasing timestamps).
struct OffsetSeries {
  std::vector<OffsetSample> samples;
  std::string source;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  /// Throws kInvalidArgument unless timestamps strictly increase.
  void check_ordered() const;
};

/// Population statistics. rms^2 == mean^2 + std^2.
struct OffsetStats {
  double peak_pos = 0.0;  // signed maximum
  double peak_neg = 0.0;  // signed minimum
  double peak_abs = 0.0;  // max |x|
  double mean = 0.0;
  double std = 0.0;
  double rms = 0.0;
  std::size_t n = 0;
};

OffsetStats summarize(std::span<const double> values);
OffsetStats offset_statistics(const OffsetSeries& series);

/// Centered moving average over [t - w/2, t + w/2]. Only timestamps whose
/// full window lies inside the series span are emitted.
OffsetSeries moving_window_mean(const OffsetSeries& series, double window_s = 7200.0);

/// floor(frame_slots * delta_guard / slot_duration).
long guard_interval_gain(long frame_slots, double slot_duration_s, double delta_guard_s);

/// c * timing_error.
double ranging_error(double timing_error_s);

/// speed * timing_error.
double relative_position_error(double speed_mps, double timing_error_s);

/// position_tolerance / speed; throws kInvalidArgument for zero speed.
double required_timing_accuracy(double speed_mps, double position_tolerance_m);

// PPS CSV: header `t_s,offset_ns`, `#` comment lines skipped.
OffsetSeries parse_offset_csv(const std::string& text, std::string source = "");
OffsetSeries load_offset_csv(const std::filesystem::path& path);
std::string format_offset_csv(const OffsetSeries& series);

/// Aligned table with Peak / Mean / STD / RMS columns, one row per entry.
struct StatsRow {
  std::string label;
  OffsetStats stats;
};
std::string format_stats_table(const std::vector<StatsRow>& rows);

}  // namespace vts::analysis
