#pragma once

#include "vts/analysis.hpp"
#include "vts/common.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace vts::clocks {

inline constexpr double kDefaultLeapSeconds = 18.0;

/// Affine node clock C(t) = drift_rate * t + offset_s.
struct QuartzClock {
  int node_id = 0;
  double drift_rate = 1.0;
  double offset_s = 0.0;
};

/// Rejects |drift_rate - 1| > 1e-4.
void check_clock(const QuartzClock& clock);

double read_clock(const QuartzClock& clock, double t_true);

/// GPS time transfer: delta_t_r = t_r - t_gps and
/// t_utc = t_r - delta_t_r - delta_t_utc with delta_t_utc = t_gps - t_utc.
struct TimeTransferState {
  double t_r = 0.0;
  double delta_t_r = 0.0;
  double delta_t_utc = kDefaultLeapSeconds;
  double t_gps = 0.0;
  double t_utc = 0.0;
};

TimeTransferState gps_to_utc(double t_r, double delta_t_r, double delta_t_utc = kDefaultLeapSeconds);

/// Inverse of gps_to_utc: the receiver reading that maps to t_utc.
double receiver_time_from_utc(double t_utc, double delta_t_r, double delta_t_utc = kDefaultLeapSeconds);

/// C1(t) = theta * C2(t) + beta.
struct RelativeClockParams {
  double theta = 1.0;
  double beta_s = 0.0;
};

RelativeClockParams relative_clock_params(const QuartzClock& c1, const QuartzClock& c2);

/// Slow PPS wander: first-order autoregressive series with stationary
/// standard deviation `amplitude_ns` and e-folding time `correlation_time_s`.
struct DriftProcess {
  double amplitude_ns = 0.0;
  double correlation_time_s = 3600.0;
};

/// Per-pulse PPS edge error = bias + drift(k) + white jitter.
struct PpsErrorModel {
  double bias_ns = 0.0;
  DriftProcess drift;
  double jitter_std_ns = 0.0;
  std::uint64_t seed = 0;
  /// Seed of the drift realization; defaults to one derived from `seed`.
  /// Two models sharing it see the same wander.
  std::optional<std::uint64_t> drift_seed;
};

void check_pps_model(const PpsErrorModel& model);

/// Offsets (ns) of pulses 0..n-1 at `rate_hz` pulses per second.
std::vector<double> generate_pps_offsets(const PpsErrorModel& model, std::size_t n,
                                         double rate_hz = 1.0);

/// Offset of a single pulse; equals generate_pps_offsets(model, k + 1)[k].
double pps_offset_at(const PpsErrorModel& model, std::size_t pulse_index, double rate_hz = 1.0);

/// Pulse-by-pulse difference a - b, timestamped k / rate_hz.
analysis::OffsetSeries pairwise_pps_series(const PpsErrorModel& a, const PpsErrorModel& b,
                                           std::size_t n_pulses, double rate_hz = 1.0);

enum class PpsPreset { kSameModel, kDiffModel };
std::string_view to_string(PpsPreset p);
PpsPreset parse_pps_preset(std::string_view name);

/// Receiver error model for `unit` (0, 1, ...) of a preset. For the
/// different-model preset even units are vendor A and odd units vendor B.
PpsErrorModel pps_preset_receiver(PpsPreset preset, std::uint64_t seed, int unit);

/// The two receivers compared in a bench run of the preset.
std::pair<PpsErrorModel, PpsErrorModel> pps_preset_pair(PpsPreset preset, std::uint64_t seed);

/// A node clock steered by PPS edges.
///
/// Each available pulse k (nominal time t_k, edge error e_k) latches the raw
/// clock at t_k + e_k and sets the bias estimate to C(t_k + e_k) - t_k. The
/// corrected reading is C(t) minus the latest estimate; before the first
/// pulse the clock is uncorrected. The receiver register (raw clock minus
/// applied steps) is stepped to GPS time whenever its bias reaches the
/// adjust limit.
class DisciplinedClock {
 public:
  struct Update {
    double edge_time = 0.0;     // true time of the latched edge
    double bias_estimate = 0.0;
    bool stepped = false;
  };

  DisciplinedClock(QuartzClock clock, std::vector<Update> updates, double adjust_limit_s);

  double corrected(double t_true) const;
  double error(double t_true) const { return corrected(t_true) - t_true; }
  /// Raw clock minus the steps applied so far.
  double register_reading(double t_true) const;
  /// Latest update at or before t_true, if any.
  const Update* latest(double t_true) const;

  const QuartzClock& clock() const { return clock_; }
  const std::vector<Update>& updates() const { return updates_; }
  std::size_t step_count() const;
  double adjust_limit_s() const { return adjust_limit_s_; }

 private:
  QuartzClock clock_;
  std::vector<Update> updates_;
  std::vector<double> applied_steps_;  // cumulative register step after each update
  double adjust_limit_s_;
};

/// `pps_events` carries the nominal pulse times and their edge errors (ns);
/// missing pulses are outages.
DisciplinedClock discipline_clock(const QuartzClock& clock, const analysis::OffsetSeries& pps_events,
                                  double adjust_limit_s = 0.1);

}  // namespace vts::clocks
