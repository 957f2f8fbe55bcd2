#include "vts/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vts {

Trajectory::Trajectory(std::vector<TrajectoryPoint> points) : points_(std::move(points)) {
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].t > points_[i - 1].t)) {
      throw Error(ErrorCode::kInvalidArgument, "trajectory timestamps must be strictly increasing");
    }
  }
}

TrajectoryPoint Trajectory::at(double t) const {
  if (points_.empty()) throw Error(ErrorCode::kEmptyInput, "empty trajectory");
  if (t <= points_.front().t) return {t, points_.front().position_m, points_.front().heading_rad,
                                      points_.front().profile};
  if (t >= points_.back().t) return {t, points_.back().position_m, points_.back().heading_rad,
                                     points_.back().profile};
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const TrajectoryPoint& p) { return v < p.t; });
  const TrajectoryPoint& b = *it;
  const TrajectoryPoint& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return {t, a.position_m + w * (b.position_m - a.position_m), a.heading_rad, a.profile};
}

Trajectory static_trajectory(const Vec3& position_m, double duration_s) {
  std::vector<TrajectoryPoint> pts{{0.0, position_m, 0.0, 0}};
  if (duration_s > 0.0) pts.push_back({duration_s, position_m, 0.0, 0});
  return Trajectory(std::move(pts));
}

Trajectory street_drive(double lat_deg, double lon_deg, const std::vector<StreetSegment>& segments,
                        double sample_step_s) {
  if (segments.empty()) throw Error(ErrorCode::kEmptyInput, "street drive needs segments");
  if (!(sample_step_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sample step must be > 0");
  const Vec3 origin = geocentric_to_ecef(deg2rad(lat_deg), deg2rad(lon_deg));
  const Eigen::Matrix3d enu_to_ecef = ecef_to_enu_rotation(origin).transpose();

  std::vector<TrajectoryPoint> pts;
  Vec3 enu = Vec3::Zero();
  double t = 0.0;
  for (const auto& seg : segments) {
    const double heading = wrap_two_pi(deg2rad(seg.heading_deg));
    const Vec3 dir(std::sin(heading), std::cos(heading), 0.0);
    const double seg_start = t;
    const Vec3 seg_origin = enu;
    const auto steps = static_cast<long>(std::ceil(seg.duration_s / sample_step_s - 1e-9));
    for (long k = 0; k < steps; ++k) {
      const double dt = std::min(static_cast<double>(k) * sample_step_s, seg.duration_s);
      const Vec3 p = seg_origin + dir * seg.speed_mps * dt;
      pts.push_back({seg_start + dt, origin + enu_to_ecef * p, heading, seg.profile});
    }
    t = seg_start + seg.duration_s;
    enu = seg_origin + dir * seg.speed_mps * seg.duration_s;
  }
  const auto& last = segments.back();
  pts.push_back({t, origin + enu_to_ecef * enu, wrap_two_pi(deg2rad(last.heading_deg)), last.profile});
  return Trajectory(std::move(pts));
}

Trajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<TrajectoryPoint> pts;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      std::string compact;
      std::remove_copy_if(line.begin(), line.end(), std::back_inserter(compact),
                          [](unsigned char c) { return std::isspace(c); });
      if (compact != "t_s,x_m,y_m,z_m") {
        throw Error(ErrorCode::kParse, "trajectory line " + std::to_string(line_no) +
                                           ": expected header 't_s,x_m,y_m,z_m'");
      }
      header_seen = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double t, x, y, z;
    if (!(fields >> t >> x >> y >> z)) {
      throw Error(ErrorCode::kParse, "trajectory line " + std::to_string(line_no) +
                                         ": expected four numeric columns");
    }
    pts.push_back({t, Vec3(x, y, z), 0.0, 0});
  }
  if (!header_seen) {
    throw Error(ErrorCode::kParse, "trajectory: missing header 't_s,x_m,y_m,z_m'");
  }
  if (pts.empty()) throw Error(ErrorCode::kEmptyInput, "trajectory has no samples");

  double heading = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec3 d = ecef_to_enu_rotation(pts[i].position_m) * (pts[i + 1].position_m - pts[i].position_m);
    if (std::hypot(d.x(), d.y()) > 1e-6) heading = wrap_two_pi(std::atan2(d.x(), d.y()));
    pts[i].heading_rad = heading;
  }
  pts.back().heading_rad = heading;
  return Trajectory(std::move(pts));
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read trajectory " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trajectory_csv(buf.str());
}

}  // namespace vts
