#pragma once

#include "vts/common.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vts {

/// One earth-fixed receiver sample. `heading_rad` is the direction of travel
/// (clockwise from north) and `profile` indexes the street profile in force.
struct TrajectoryPoint {
  double t = 0.0;
  Vec3 position_m = Vec3::Zero();
  double heading_rad = 0.0;
  int profile = 0;
};

class Trajectory {
 public:
  Trajectory() = default;
  /// Throws kInvalidArgument unless timestamps are strictly increasing.
  explicit Trajectory(std::vector<TrajectoryPoint> points);

  const std::vector<TrajectoryPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  double start() const { return points_.front().t; }
  double end() const { return points_.back().t; }

  /// Linear position interpolation, clamped at both ends. Heading and
  /// profile come from the latest sample at or before t.
  TrajectoryPoint at(double t) const;

 private:
  std::vector<TrajectoryPoint> points_;
};

/// Receiver parked at one place over [0, duration_s].
Trajectory static_trajectory(const Vec3& position_m, double duration_s);

struct StreetSegment {
  double heading_deg = 0.0;
  double duration_s = 0.0;
  double speed_mps = 0.0;
  int profile = 0;
};

/// Dead-reckons a drive through straight street segments on the tangent plane
/// at (lat, lon), sampled every `sample_step_s`.
Trajectory street_drive(double lat_deg, double lon_deg, const std::vector<StreetSegment>& segments,
                        double sample_step_s = 1.0);

/// CSV with header `t_s,x_m,y_m,z_m` (earth-fixed). Headings are derived from
/// consecutive displacements in the local horizontal plane.
Trajectory load_trajectory_csv(const std::filesystem::path& path);
Trajectory parse_trajectory_csv(const std::string& text);

}  // namespace vts
