#pragma once

#include "vts/common.hpp"
#include "vts/constellation.hpp"
#include "vts/trajectory.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vts::visibility {

struct Sector {
  double azimuth_start_rad = 0.0;
  double azimuth_end_rad = kTwoPi;
  double min_elevation_rad = 0.0;
};

/// Azimuth-sectored elevation cutoffs. Sectors are ordered, contiguous and
/// cover [0, 2pi); every sector minimum is at least the base cutoff.
class VisibilityMask {
 public:
  /// Uniform cutoff (open sky). Default 10 degrees.
  static VisibilityMask open_sky(double base_cutoff_rad = deg2rad(10.0));
  /// Throws kInvalidArgument if the sectors break the invariants.
  VisibilityMask(std::vector<Sector> sectors, double base_cutoff_rad);

  const std::vector<Sector>& sectors() const { return sectors_; }
  double base_cutoff_rad() const { return base_cutoff_rad_; }
  double min_elevation_at(double azimuth_rad) const;
  bool admits(double elevation_rad, double azimuth_rad) const {
    return elevation_rad > min_elevation_at(azimuth_rad);
  }

 private:
  std::vector<Sector> sectors_;
  double base_cutoff_rad_;
};

/// Street cross-section: walls either side of the street, an open corridor of
/// +-corridor_half_width around the street axis in both directions.
struct CanyonProfile {
  std::string name;
  double wall_elevation_rad = deg2rad(10.0);
  double corridor_half_width_rad = 0.0;
  double along_street_elevation_rad = deg2rad(10.0);

  VisibilityMask mask(double heading_rad, double base_cutoff_rad) const;
};

/// Chooses the mask in force at each trajectory sample.
class MaskModel {
 public:
  static MaskModel fixed(VisibilityMask mask);
  static MaskModel canyon(std::vector<CanyonProfile> profiles,
                          double base_cutoff_rad = deg2rad(10.0));

  VisibilityMask at(const TrajectoryPoint& p) const;

 private:
  MaskModel() = default;
  std::optional<VisibilityMask> fixed_;
  std::vector<CanyonProfile> profiles_;
  double base_cutoff_rad_ = deg2rad(10.0);
};

enum class EpochClass { kGe4, kOneToThree, kZero };
std::string_view to_string(EpochClass c);

struct AvailabilityRecord {
  double t = 0.0;
  int nsat = 0;
  std::vector<std::string> visible_ids;
  std::optional<double> gdop;  // present iff nsat >= 4; +inf for singular geometry
  EpochClass cls = EpochClass::kZero;
};

struct AvailabilityReport {
  std::string constellation;
  std::size_t epoch_count = 0;
  double gdop_threshold = 6.0;
  // Class percentages.
  double pct_ge4 = 0.0;
  double pct_one_to_three = 0.0;
  double pct_zero = 0.0;
  // GDOP breakdown.
  double pct_nsat_lt4 = 0.0;
  double pct_gdop_ok = 0.0;
  double pct_gdop_high = 0.0;

  double pct_nsat_ge1() const { return pct_ge4 + pct_one_to_three; }
};

struct AvailabilityResult {
  AvailabilityReport report;
  std::vector<AvailabilityRecord> records;
};

using SatelliteState = std::pair<std::string, constellation::EcefState>;

std::vector<std::string> visible_satellites(const std::vector<SatelliteState>& states,
                                            const Vec3& rx_pos, const VisibilityMask& mask);

EpochClass classify_epoch(int nsat);

/// Epoch times t0 + k * step over the trajectory span (end exclusive; a
/// single-sample trajectory yields one epoch).
std::vector<double> epoch_times(const Trajectory& trajectory, double epoch_step_s);

AvailabilityResult availability_summary(const std::vector<constellation::OrbitElements>& constellation,
                                        const Trajectory& trajectory, const MaskModel& mask,
                                        double epoch_step_s, double gdop_threshold = 6.0,
                                        std::string tag = "");

/// Evaluates several constellation sets over one shared pass. Elements are
/// filtered per set by family.
std::vector<AvailabilityResult> availability_for_sets(
    const std::vector<constellation::OrbitElements>& all_elements,
    const std::vector<constellation::ConstellationSet>& sets, const Trajectory& trajectory,
    const MaskModel& mask, double epoch_step_s, double gdop_threshold = 6.0);

}  // namespace vts::visibility
