#pragma once

#include "vts/common.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace vts::constellation {

enum class Family { kGps, kBdsMeo, kBdsIgso, kBdsGeo };
enum class ConstellationSet { kGps, kBds, kGpsPlusBds };

std::string_view to_string(Family f);
std::string_view to_string(ConstellationSet s);
Family parse_family(std::string_view tag);
ConstellationSet parse_constellation_set(std::string_view tag);

/// True when a satellite of family f belongs to set s.
bool belongs_to(Family f, ConstellationSet s);

/// Circular orbit description. Angles are radians in an inertial frame that
/// coincides with the earth-fixed frame at simulation time zero.
struct OrbitElements {
  std::string sat_id;
  Family family = Family::kGps;
  double semi_major_axis_m = 0.0;
  double eccentricity = 0.0;
  double inclination_rad = 0.0;
  double raan_rad = 0.0;
  double arg_lat_at_epoch_rad = 0.0;
  double mean_motion_rad_per_s = 0.0;

  double period_s() const { return kTwoPi / mean_motion_rad_per_s; }
};

struct EcefState {
  Vec3 position_m = Vec3::Zero();
  Vec3 velocity_m_per_s = Vec3::Zero();
  double t = 0.0;
};

/// Satellite time minus GPS time after broadcast correction.
struct SatelliteClock {
  double offset_s = 0.0;
};

/// sqrt(GM / a^3).
double kepler_mean_motion(double semi_major_axis_m);

/// Radius whose circular period equals one sidereal day.
double geosynchronous_radius();

/// Throws kInvalidArgument when an element breaks the orbit invariants
/// (radius above the surface, inclination in [0, pi], Kepler consistency).
void check_elements(const OrbitElements& el);

/// Nominal 24-slot GPS and 24 MEO + 3 IGSO + 3 GEO BDS. The epoch shifts the
/// constellation so that simulation time zero shows the state at `epoch_s`.
std::vector<OrbitElements> build_nominal_constellation(ConstellationSet set,
                                                       double epoch_s = 0.0);

/// Selects the members of `set` from a mixed element list.
std::vector<OrbitElements> select(const std::vector<OrbitElements>& all,
                                  ConstellationSet set);

/// Position/velocity in the inertial frame.
EcefState propagate_inertial(const OrbitElements& el, double t);

/// Position/velocity in the earth-fixed frame at simulation time t >= 0.
EcefState propagate(const OrbitElements& el, double t);

struct ElevAz {
  double elevation_rad;
  double azimuth_rad;
};

/// Elevation and azimuth of a satellite seen from rx in the local ENU frame.
ElevAz elevation_azimuth(const Vec3& sat_pos, const Vec3& rx_pos);

/// Reads a constellation text file. One satellite per line:
///   id family a_m eccentricity inc_deg raan_deg arg_lat_deg mean_motion
/// where mean_motion is rad/s or `auto`. Blank lines and `#` comments are
/// skipped; commas count as whitespace.
std::vector<OrbitElements> load_constellation(const std::filesystem::path& path);
std::vector<OrbitElements> parse_constellation(std::string_view text);

}  // namespace vts::constellation
