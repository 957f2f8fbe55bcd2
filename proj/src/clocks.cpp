#include "vts/clocks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vts::clocks {

void check_clock(const QuartzClock& clock) {
  if (!(std::abs(clock.drift_rate - 1.0) <= 1e-4)) {
    throw Error(ErrorCode::kInvalidArgument,
                "node " + std::to_string(clock.node_id) + ": |drift_rate - 1| exceeds 1e-4");
  }
}

double read_clock(const QuartzClock& clock, double t_true) {
  return clock.drift_rate * t_true + clock.offset_s;
}

TimeTransferState gps_to_utc(double t_r, double delta_t_r, double delta_t_utc) {
  TimeTransferState s;
  s.t_r = t_r;
  s.delta_t_r = delta_t_r;
  s.delta_t_utc = delta_t_utc;
  s.t_gps = t_r - delta_t_r;
  s.t_utc = t_r - delta_t_r - delta_t_utc;
  return s;
}

double receiver_time_from_utc(double t_utc, double delta_t_r, double delta_t_utc) {
  return t_utc + delta_t_utc + delta_t_r;
}

RelativeClockParams relative_clock_params(const QuartzClock& c1, const QuartzClock& c2) {
  if (c2.drift_rate == 0.0) {
    throw Error(ErrorCode::kDegenerateClock, "reference clock has zero drift rate");
  }
  RelativeClockParams p;
  p.theta = c1.drift_rate / c2.drift_rate;
  p.beta_s = c1.offset_s - p.theta * c2.offset_s;
  return p;
}

void check_pps_model(const PpsErrorModel& model) {
  if (model.jitter_std_ns < 0.0) throw Error(ErrorCode::kInvalidArgument, "jitter std must be >= 0");
  if (model.drift.amplitude_ns < 0.0) throw Error(ErrorCode::kInvalidArgument, "drift amplitude must be >= 0");
  if (!(model.drift.correlation_time_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "drift correlation time must be > 0");
  }
}

std::vector<double> generate_pps_offsets(const PpsErrorModel& model, std::size_t n, double rate_hz) {
  check_pps_model(model);
  if (!(rate_hz > 0.0)) throw Error(ErrorCode::kInvalidArgument, "pulse rate must be > 0");

  NormalStream jitter(derive_seed(model.seed, "pps.jitter"));
  NormalStream wander(model.drift_seed ? *model.drift_seed : derive_seed(model.seed, "pps.drift"));
  const double phi = std::exp(-1.0 / (rate_hz * model.drift.correlation_time_s));
  const double innovation = model.drift.amplitude_ns * std::sqrt(1.0 - phi * phi);

  std::vector<double> out;
  out.reserve(n);
  double drift = model.drift.amplitude_ns * wander.next();
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) drift = phi * drift + innovation * wander.next();
    out.push_back(model.bias_ns + drift + jitter.next(model.jitter_std_ns));
  }
  return out;
}

double pps_offset_at(const PpsErrorModel& model, std::size_t pulse_index, double rate_hz) {
  return generate_pps_offsets(model, pulse_index + 1, rate_hz).back();
}

analysis::OffsetSeries pairwise_pps_series(const PpsErrorModel& a, const PpsErrorModel& b,
                                           std::size_t n_pulses, double rate_hz) {
  if (n_pulses == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one pulse");
  const auto oa = generate_pps_offsets(a, n_pulses, rate_hz);
  const auto ob = generate_pps_offsets(b, n_pulses, rate_hz);
  analysis::OffsetSeries s;
  s.source = "pairwise";
  s.samples.reserve(n_pulses);
  for (std::size_t k = 0; k < n_pulses; ++k) {
    s.samples.push_back({static_cast<double>(k) / rate_hz, oa[k] - ob[k]});
  }
  return s;
}

std::string_view to_string(PpsPreset p) {
  return p == PpsPreset::kSameModel ? "same-model" : "diff-model";
}

PpsPreset parse_pps_preset(std::string_view name) {
  if (name == "same-model" || name == "SAME_MODEL") return PpsPreset::kSameModel;
  if (name == "diff-model" || name == "DIFF_MODEL") return PpsPreset::kDiffModel;
  throw Error(ErrorCode::kConfiguration,
              "unknown PPS preset '" + std::string(name) + "' (known: same-model, diff-model)");
}

// Calibrated against bench statistics of consumer receivers: two units of one
// model differ by roughly 12 ns RMS, units from two vendors by roughly 30 ns
// with a 2 h wander of their relative bias.
PpsErrorModel pps_preset_receiver(PpsPreset preset, std::uint64_t seed, int unit) {
  PpsErrorModel m;
  m.seed = mix_seed(seed, static_cast<std::uint64_t>(unit));
  if (preset == PpsPreset::kSameModel) {
    m.bias_ns = 0.0;
    m.drift = {1.5, 1800.0};
    m.jitter_std_ns = 9.0;
  } else {
    m.bias_ns = unit % 2 == 0 ? 5.0 : 0.0;
    m.drift = {6.0, 7200.0};
    m.jitter_std_ns = 20.0;
  }
  return m;
}

std::pair<PpsErrorModel, PpsErrorModel> pps_preset_pair(PpsPreset preset, std::uint64_t seed) {
  return {pps_preset_receiver(preset, seed, 0), pps_preset_receiver(preset, seed, 1)};
}

DisciplinedClock::DisciplinedClock(QuartzClock clock, std::vector<Update> updates, double adjust_limit_s)
    : clock_(clock), updates_(std::move(updates)), adjust_limit_s_(adjust_limit_s) {
  double applied = 0.0;
  applied_steps_.reserve(updates_.size());
  for (auto& u : updates_) {
    if (std::abs(u.bias_estimate - applied) >= adjust_limit_s_) {
      applied = u.bias_estimate;
      u.stepped = true;
    }
    applied_steps_.push_back(applied);
  }
}

const DisciplinedClock::Update* DisciplinedClock::latest(double t_true) const {
  auto it = std::upper_bound(updates_.begin(), updates_.end(), t_true,
                             [](double t, const Update& u) { return t < u.edge_time; });
  if (it == updates_.begin()) return nullptr;
  return &*(it - 1);
}

double DisciplinedClock::corrected(double t_true) const {
  const Update* u = latest(t_true);
  const double raw = read_clock(clock_, t_true);
  return u ? raw - u->bias_estimate : raw;
}

double DisciplinedClock::register_reading(double t_true) const {
  const Update* u = latest(t_true);
  const double raw = read_clock(clock_, t_true);
  if (!u) return raw;
  return raw - applied_steps_[static_cast<std::size_t>(u - updates_.data())];
}

std::size_t DisciplinedClock::step_count() const {
  return static_cast<std::size_t>(
      std::count_if(updates_.begin(), updates_.end(), [](const Update& u) { return u.stepped; }));
}

DisciplinedClock discipline_clock(const QuartzClock& clock, const analysis::OffsetSeries& pps_events,
                                  double adjust_limit_s) {
  if (pps_events.empty()) throw Error(ErrorCode::kEmptyInput, "no PPS events to discipline with");
  if (!(adjust_limit_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "adjust limit must be > 0");
  std::vector<DisciplinedClock::Update> updates;
  updates.reserve(pps_events.size());
  for (const auto& p : pps_events.samples) {
    const double edge = p.t_s + p.offset_ns * 1e-9;
    if (!updates.empty() && !(edge > updates.back().edge_time)) {
      throw Error(ErrorCode::kInvalidArgument, "PPS edges must be strictly increasing");
    }
    updates.push_back({edge, read_clock(clock, edge) - p.t_s, false});
  }
  return DisciplinedClock(clock, std::move(updates), adjust_limit_s);
}

}  // namespace vts::clocks
