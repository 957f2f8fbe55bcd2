#include "vts/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vts::analysis {

void OffsetSeries::check_ordered() const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t_s > samples[i - 1].t_s)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "offset series timestamps must be strictly increasing (sample " +
                      std::to_string(i) + ")");
    }
  }
}

OffsetStats summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "statistics of an empty series");
  OffsetStats s;
  s.n = values.size();
  s.peak_pos = values.front();
  s.peak_neg = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.peak_pos = std::max(s.peak_pos, v);
    s.peak_neg = std::min(s.peak_neg, v);
  }
  const double n = static_cast<double>(s.n);
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  s.rms = std::sqrt(s.mean * s.mean + s.std * s.std);
  s.peak_abs = std::max(std::abs(s.peak_pos), std::abs(s.peak_neg));
  return s;
}

OffsetStats offset_statistics(const OffsetSeries& series) {
  std::vector<double> v;
  v.reserve(series.size());
  for (const auto& s : series.samples) v.push_back(s.offset_ns);
  return summarize(v);
}

OffsetSeries moving_window_mean(const OffsetSeries& series, double window_s) {
  if (!(window_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "window must be > 0");
  if (series.empty()) throw Error(ErrorCode::kEmptyInput, "moving window over an empty series");
  const auto& s = series.samples;
  const double first = s.front().t_s;
  const double last = s.back().t_s;
  const double half = 0.5 * window_s;
  if (window_s > last - first) {
    throw Error(ErrorCode::kEmptyInput, "window longer than the series span");
  }

  std::vector<double> prefix(s.size() + 1, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) prefix[i + 1] = prefix[i] + s[i].offset_ns;

  OffsetSeries out;
  out.source = series.source + " (moving mean)";
  std::size_t lo = 0, hi = 0;  // window is [lo, hi)
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s[i].t_s;
    if (t - half < first - 1e-9 || t + half > last + 1e-9) continue;
    while (s[lo].t_s < t - half - 1e-9) ++lo;
    if (hi < lo) hi = lo;
    while (hi < s.size() && s[hi].t_s <= t + half + 1e-9) ++hi;
    const double mean = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    out.samples.push_back({t, mean});
  }
  return out;
}

long guard_interval_gain(long frame_slots, double slot_duration_s, double delta_guard_s) {
  if (frame_slots <= 0 || !(slot_duration_s > 0.0) || delta_guard_s < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "guard gain needs slots > 0, slot duration > 0 and delta >= 0");
  }
  // Small relative slack so exact quotients are not floored down by rounding.
  const double q = static_cast<double>(frame_slots) * delta_guard_s / slot_duration_s;
  return static_cast<long>(std::floor(q * (1.0 + 1e-12)));
}

double ranging_error(double timing_error_s) {
  if (timing_error_s < 0.0) throw Error(ErrorCode::kInvalidArgument, "timing error must be >= 0");
  return kSpeedOfLight * timing_error_s;
}

double relative_position_error(double speed_mps, double timing_error_s) {
  if (speed_mps < 0.0 || timing_error_s < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "speed and timing error must be >= 0");
  }
  return speed_mps * timing_error_s;
}

double required_timing_accuracy(double speed_mps, double position_tolerance_m) {
  if (!(speed_mps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "timing requirement undefined for zero speed");
  }
  if (position_tolerance_m < 0.0) throw Error(ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  return position_tolerance_m / speed_mps;
}

OffsetSeries parse_offset_csv(const std::string& text, std::string source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  OffsetSeries out;
  out.source = std::move(source);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!header_seen) {
      std::string compact;
      std::remove_copy_if(line.begin(), line.end(), std::back_inserter(compact),
                          [](unsigned char c) { return std::isspace(c); });
      if (compact != "t_s,offset_ns") {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                           ": expected header 't_s,offset_ns'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    double t = 0.0, v = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      try {
        std::size_t used_t = 0, used_v = 0;
        const std::string ts = line.substr(0, comma);
        const std::string vs = line.substr(comma + 1);
        t = std::stod(ts, &used_t);
        v = std::stod(vs, &used_v);
        ok = ts.find_first_not_of(" \t", used_t) == std::string::npos &&
             vs.find_first_not_of(" \t", used_v) == std::string::npos;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": malformed row '" + line + "'");
    }
    if (!out.samples.empty() && !(t > out.samples.back().t_s)) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": timestamps must be strictly increasing");
    }
    out.samples.push_back({t, v});
  }
  if (!header_seen) throw Error(ErrorCode::kParse, "missing header 't_s,offset_ns'");
  return out;
}

OffsetSeries load_offset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_offset_csv(buf.str(), path.filename().string());
}

std::string format_offset_csv(const OffsetSeries& series) {
  std::string out = "t_s,offset_ns\n";
  char buf[64];
  for (const auto& s : series.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", s.t_s, s.offset_ns);
    out += buf;
  }
  return out;
}

std::string format_stats_table(const std::vector<StatsRow>& rows) {
  std::size_t label_w = 12;
  for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %16s %10s %10s %10s\n", static_cast<int>(label_w),
                "Session", "Peak", "Mean", "STD", "RMS");
  out += buf;
  for (const auto& r : rows) {
    char peak[64];
    std::snprintf(peak, sizeof(peak), "%+.1f/%+.1f", r.stats.peak_pos, r.stats.peak_neg);
    std::snprintf(buf, sizeof(buf), "%-*s %16s %10.2f %10.2f %10.2f\n", static_cast<int>(label_w),
                  r.label.c_str(), peak, r.stats.mean, r.stats.std, r.stats.rms);
    out += buf;
  }
  return out;
}

}  // namespace vts::analysis
