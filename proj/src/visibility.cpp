#include "vts/visibility.hpp"

#include "vts/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace vts::visibility {
namespace {

constexpr double kAngleEps = 1e-12;

double axis_distance(double az, double heading) {
  // Angular distance from az to the street axis (either direction).
  double d = std::fmod(std::abs(az - heading), kPi);
  return std::min(d, kPi - d);
}

}  // namespace

VisibilityMask VisibilityMask::open_sky(double base_cutoff_rad) {
  return VisibilityMask({{0.0, kTwoPi, base_cutoff_rad}}, base_cutoff_rad);
}

VisibilityMask::VisibilityMask(std::vector<Sector> sectors, double base_cutoff_rad)
    : sectors_(std::move(sectors)), base_cutoff_rad_(base_cutoff_rad) {
  if (sectors_.empty()) throw Error(ErrorCode::kInvalidArgument, "mask needs at least one sector");
  double expect = 0.0;
  for (const auto& s : sectors_) {
    if (std::abs(s.azimuth_start_rad - expect) > kAngleEps || !(s.azimuth_end_rad > s.azimuth_start_rad)) {
      throw Error(ErrorCode::kInvalidArgument, "mask sectors must be contiguous and ordered from 0");
    }
    if (s.min_elevation_rad < base_cutoff_rad - kAngleEps) {
      throw Error(ErrorCode::kInvalidArgument, "sector minimum below base cutoff");
    }
    expect = s.azimuth_end_rad;
  }
  if (std::abs(expect - kTwoPi) > kAngleEps) {
    throw Error(ErrorCode::kInvalidArgument, "mask sectors must cover [0, 2pi)");
  }
}

double VisibilityMask::min_elevation_at(double azimuth_rad) const {
  const double az = wrap_two_pi(azimuth_rad);
  auto it = std::upper_bound(sectors_.begin(), sectors_.end(), az,
                             [](double v, const Sector& s) { return v < s.azimuth_end_rad; });
  if (it == sectors_.end()) --it;
  return it->min_elevation_rad;
}

VisibilityMask CanyonProfile::mask(double heading_rad, double base_cutoff_rad) const {
  const double w = corridor_half_width_rad;
  std::vector<double> cuts{0.0, kTwoPi};
  for (double axis : {heading_rad, heading_rad + kPi}) {
    for (double edge : {axis - w, axis + w}) cuts.push_back(wrap_two_pi(edge));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < kAngleEps; }),
             cuts.end());

  const double along = std::max(along_street_elevation_rad, base_cutoff_rad);
  const double wall = std::max(wall_elevation_rad, base_cutoff_rad);
  std::vector<Sector> sectors;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double el = axis_distance(mid, heading_rad) < w ? along : wall;
    if (!sectors.empty() && sectors.back().min_elevation_rad == el) {
      sectors.back().azimuth_end_rad = cuts[i + 1];
    } else {
      sectors.push_back({cuts[i], cuts[i + 1], el});
    }
  }
  sectors.back().azimuth_end_rad = kTwoPi;
  return VisibilityMask(std::move(sectors), base_cutoff_rad);
}

MaskModel MaskModel::fixed(VisibilityMask mask) {
  MaskModel m;
  m.base_cutoff_rad_ = mask.base_cutoff_rad();
  m.fixed_ = std::move(mask);
  return m;
}

MaskModel MaskModel::canyon(std::vector<CanyonProfile> profiles, double base_cutoff_rad) {
  if (profiles.empty()) throw Error(ErrorCode::kInvalidArgument, "canyon mask needs a profile");
  MaskModel m;
  m.profiles_ = std::move(profiles);
  m.base_cutoff_rad_ = base_cutoff_rad;
  return m;
}

VisibilityMask MaskModel::at(const TrajectoryPoint& p) const {
  if (fixed_) return *fixed_;
  const auto idx = static_cast<std::size_t>(std::clamp<int>(p.profile, 0, static_cast<int>(profiles_.size()) - 1));
  return profiles_[idx].mask(p.heading_rad, base_cutoff_rad_);
}

std::string_view to_string(EpochClass c) {
  switch (c) {
    case EpochClass::kGe4: return "GE4";
    case EpochClass::kOneToThree: return "ONE_TO_THREE";
    case EpochClass::kZero: return "ZERO";
  }
  return "?";
}

std::vector<std::string> visible_satellites(const std::vector<SatelliteState>& states,
                                            const Vec3& rx_pos, const VisibilityMask& mask) {
  std::vector<std::string> out;
  for (const auto& [id, st] : states) {
    const auto ea = constellation::elevation_azimuth(st.position_m, rx_pos);
    if (mask.admits(ea.elevation_rad, ea.azimuth_rad)) out.push_back(id);
  }
  return out;
}

EpochClass classify_epoch(int nsat) {
  if (nsat < 0) throw Error(ErrorCode::kInvalidArgument, "nsat must be non-negative");
  if (nsat >= 4) return EpochClass::kGe4;
  if (nsat >= 1) return EpochClass::kOneToThree;
  return EpochClass::kZero;
}

std::vector<double> epoch_times(const Trajectory& trajectory, double epoch_step_s) {
  if (trajectory.empty()) throw Error(ErrorCode::kEmptyInput, "trajectory is empty");
  if (!(epoch_step_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epoch step must be > 0");
  std::vector<double> out;
  const double t0 = trajectory.start();
  const double span = trajectory.end() - t0;
  if (span <= 0.0) return {t0};
  const auto n = static_cast<std::size_t>(std::ceil(span / epoch_step_s - 1e-9));
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(t0 + static_cast<double>(k) * epoch_step_s);
  return out;
}

std::vector<AvailabilityResult> availability_for_sets(
    const std::vector<constellation::OrbitElements>& all_elements,
    const std::vector<constellation::ConstellationSet>& sets, const Trajectory& trajectory,
    const MaskModel& mask, double epoch_step_s, double gdop_threshold) {
  const std::vector<double> times = epoch_times(trajectory, epoch_step_s);

  std::vector<AvailabilityResult> results(sets.size());
  std::vector<std::array<std::size_t, 6>> counts(sets.size(), std::array<std::size_t, 6>{});
  for (std::size_t s = 0; s < sets.size(); ++s) {
    results[s].report.constellation = std::string(constellation::to_string(sets[s]));
    results[s].report.gdop_threshold = gdop_threshold;
    results[s].records.reserve(times.size());
  }

  std::vector<Vec3> positions;
  for (double t : times) {
    const TrajectoryPoint rx = trajectory.at(t);
    const VisibilityMask m = mask.at(rx);

    std::vector<const constellation::OrbitElements*> seen;
    std::vector<Vec3> seen_pos;
    for (const auto& el : all_elements) {
      const Vec3 p = constellation::propagate(el, t).position_m;
      const auto ea = constellation::elevation_azimuth(p, rx.position_m);
      if (m.admits(ea.elevation_rad, ea.azimuth_rad)) {
        seen.push_back(&el);
        seen_pos.push_back(p);
      }
    }

    for (std::size_t s = 0; s < sets.size(); ++s) {
      AvailabilityRecord rec;
      rec.t = t;
      positions.clear();
      for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!constellation::belongs_to(seen[i]->family, sets[s])) continue;
        rec.visible_ids.push_back(seen[i]->sat_id);
        positions.push_back(seen_pos[i]);
      }
      rec.nsat = static_cast<int>(rec.visible_ids.size());
      rec.cls = classify_epoch(rec.nsat);
      auto& c = counts[s];
      if (rec.nsat >= 4) {
        try {
          rec.gdop = estimation::dop(estimation::design_matrix_enu(positions, rx.position_m)).gdop;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kGeometrySingular) throw;
          rec.gdop = std::numeric_limits<double>::infinity();
        }
        ++c[0];
        ++(*rec.gdop <= gdop_threshold ? c[4] : c[5]);
      } else {
        ++(rec.nsat >= 1 ? c[1] : c[2]);
        ++c[3];
      }
      results[s].records.push_back(std::move(rec));
    }
  }

  const double n = static_cast<double>(times.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    auto& r = results[s].report;
    const auto& c = counts[s];
    r.epoch_count = times.size();
    r.pct_ge4 = 100.0 * static_cast<double>(c[0]) / n;
    r.pct_one_to_three = 100.0 * static_cast<double>(c[1]) / n;
    r.pct_zero = 100.0 * static_cast<double>(c[2]) / n;
    r.pct_nsat_lt4 = 100.0 * static_cast<double>(c[3]) / n;
    r.pct_gdop_ok = 100.0 * static_cast<double>(c[4]) / n;
    r.pct_gdop_high = 100.0 * static_cast<double>(c[5]) / n;
  }
  return results;
}

AvailabilityResult availability_summary(const std::vector<constellation::OrbitElements>& constellation,
                                        const Trajectory& trajectory, const MaskModel& mask,
                                        double epoch_step_s, double gdop_threshold, std::string tag) {
  // Treat the supplied list as a single set regardless of family.
  auto results = availability_for_sets(constellation, {constellation::ConstellationSet::kGpsPlusBds},
                                       trajectory, mask, epoch_step_s, gdop_threshold);
  results.front().report.constellation = std::move(tag);
  return std::move(results.front());
}

}  // namespace vts::visibility
