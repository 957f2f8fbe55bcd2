#include "vts/constellation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vts::constellation {
namespace {

constexpr double kGpsSemiMajorAxis = 26'559'700.0;
constexpr double kBdsMeoSemiMajorAxis = 27'906'100.0;
constexpr double kNominalInclination = deg2rad(55.0);

std::string make_id(char prefix, int number) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%02d", prefix, number);
  return buf;
}

OrbitElements circular(std::string id, Family family, double a, double inc,
                       double raan, double arg_lat, double epoch_s) {
  OrbitElements el;
  el.sat_id = std::move(id);
  el.family = family;
  el.semi_major_axis_m = a;
  el.inclination_rad = inc;
  el.mean_motion_rad_per_s = kepler_mean_motion(a);
  el.raan_rad = wrap_two_pi(raan - kEarthRotationRate * epoch_s);
  el.arg_lat_at_epoch_rad = wrap_two_pi(arg_lat + el.mean_motion_rad_per_s * epoch_s);
  return el;
}

void append_gps(std::vector<OrbitElements>& out, double epoch_s) {
  // Walker 24/6/1.
  int n = 1;
  for (int plane = 0; plane < 6; ++plane) {
    for (int slot = 0; slot < 4; ++slot) {
      const double raan = deg2rad(60.0 * plane);
      const double u = deg2rad(90.0 * slot + 15.0 * plane);
      out.push_back(circular(make_id('G', n++), Family::kGps, kGpsSemiMajorAxis,
                             kNominalInclination, raan, u, epoch_s));
    }
  }
}

void append_bds(std::vector<OrbitElements>& out, double epoch_s) {
  const double geo_a = geosynchronous_radius();
  int n = 1;
  for (double lon_deg : {80.0, 110.5, 140.0}) {
    out.push_back(circular(make_id('C', n++), Family::kBdsGeo, geo_a, 0.0, 0.0,
                           deg2rad(lon_deg), epoch_s));
  }
  // Figure-eight ground tracks crossing the equator at 118 E.
  for (int k = 0; k < 3; ++k) {
    const double raan = deg2rad(120.0 * k);
    const double u = deg2rad(118.0) - raan;
    out.push_back(circular(make_id('C', n++), Family::kBdsIgso, geo_a,
                           kNominalInclination, raan, u, epoch_s));
  }
  // Walker 24/3/1.
  for (int plane = 0; plane < 3; ++plane) {
    for (int slot = 0; slot < 8; ++slot) {
      const double raan = deg2rad(120.0 * plane);
      const double u = deg2rad(45.0 * slot + 15.0 * plane);
      out.push_back(circular(make_id('C', n++), Family::kBdsMeo,
                             kBdsMeoSemiMajorAxis, kNominalInclination, raan, u,
                             epoch_s));
    }
  }
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kGps: return "GPS";
    case Family::kBdsMeo: return "BDS_MEO";
    case Family::kBdsIgso: return "BDS_IGSO";
    case Family::kBdsGeo: return "BDS_GEO";
  }
  return "?";
}

std::string_view to_string(ConstellationSet s) {
  switch (s) {
    case ConstellationSet::kGps: return "GPS";
    case ConstellationSet::kBds: return "BDS";
    case ConstellationSet::kGpsPlusBds: return "GPS_PLUS_BDS";
  }
  return "?";
}

Family parse_family(std::string_view tag) {
  if (tag == "GPS") return Family::kGps;
  if (tag == "BDS_MEO") return Family::kBdsMeo;
  if (tag == "BDS_IGSO") return Family::kBdsIgso;
  if (tag == "BDS_GEO") return Family::kBdsGeo;
  throw Error(ErrorCode::kParse, "unknown constellation tag '" + std::string(tag) + "'");
}

ConstellationSet parse_constellation_set(std::string_view tag) {
  if (tag == "GPS") return ConstellationSet::kGps;
  if (tag == "BDS") return ConstellationSet::kBds;
  if (tag == "GPS_PLUS_BDS" || tag == "GPS+BDS" || tag == "BDS+GPS")
    return ConstellationSet::kGpsPlusBds;
  throw Error(ErrorCode::kParse,
              "unknown constellation set '" + std::string(tag) +
                  "' (expected GPS, BDS or GPS_PLUS_BDS)");
}

bool belongs_to(Family f, ConstellationSet s) {
  switch (s) {
    case ConstellationSet::kGps: return f == Family::kGps;
    case ConstellationSet::kBds: return f != Family::kGps;
    case ConstellationSet::kGpsPlusBds: return true;
  }
  return false;
}

double kepler_mean_motion(double semi_major_axis_m) {
  return std::sqrt(kGmEarth / (semi_major_axis_m * semi_major_axis_m * semi_major_axis_m));
}

double geosynchronous_radius() {
  return std::cbrt(kGmEarth / (kEarthRotationRate * kEarthRotationRate));
}

void check_elements(const OrbitElements& el) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, "satellite " + el.sat_id + ": " + why);
  };
  if (!(el.semi_major_axis_m > kEarthRadius)) fail("semi-major axis below earth surface");
  if (el.inclination_rad < 0.0 || el.inclination_rad > kPi) fail("inclination outside [0, pi]");
  for (double angle : {el.raan_rad, el.arg_lat_at_epoch_rad}) {
    if (angle < 0.0 || angle >= kTwoPi) fail("angle not normalized to [0, 2pi)");
  }
  const double n2a3 = el.mean_motion_rad_per_s * el.mean_motion_rad_per_s *
                      std::pow(el.semi_major_axis_m, 3);
  if (std::abs(n2a3 / kGmEarth - 1.0) > 1e-9) fail("mean motion inconsistent with semi-major axis");
}

std::vector<OrbitElements> build_nominal_constellation(ConstellationSet set, double epoch_s) {
  std::vector<OrbitElements> out;
  if (set != ConstellationSet::kBds) append_gps(out, epoch_s);
  if (set != ConstellationSet::kGps) append_bds(out, epoch_s);
  return out;
}

std::vector<OrbitElements> select(const std::vector<OrbitElements>& all, ConstellationSet set) {
  std::vector<OrbitElements> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out),
               [set](const OrbitElements& el) { return belongs_to(el.family, set); });
  return out;
}

EcefState propagate_inertial(const OrbitElements& el, double t) {
  const double a = el.semi_major_axis_m;
  const double n = el.mean_motion_rad_per_s;
  const double u = el.arg_lat_at_epoch_rad + n * t;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(el.raan_rad), so = std::sin(el.raan_rad);
  const double ci = std::cos(el.inclination_rad), si = std::sin(el.inclination_rad);

  EcefState s;
  s.t = t;
  s.position_m = a * Vec3(co * cu - so * ci * su, so * cu + co * ci * su, si * su);
  s.velocity_m_per_s = a * n * Vec3(-co * su - so * ci * cu, -so * su + co * ci * cu, si * cu);
  return s;
}

EcefState propagate(const OrbitElements& el, double t) {
  const EcefState in = propagate_inertial(el, t);
  const double theta = kEarthRotationRate * t;
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix3d rot;
  rot << c, s, 0.0,
        -s, c, 0.0,
         0.0, 0.0, 1.0;
  EcefState out;
  out.t = t;
  out.position_m = rot * in.position_m;
  const Vec3 omega(0.0, 0.0, kEarthRotationRate);
  out.velocity_m_per_s = rot * in.velocity_m_per_s - omega.cross(out.position_m);
  return out;
}

ElevAz elevation_azimuth(const Vec3& sat_pos, const Vec3& rx_pos) {
  const Vec3 d = sat_pos - rx_pos;
  const double range = d.norm();
  if (range == 0.0) {
    throw Error(ErrorCode::kDegenerateGeometry, "satellite coincides with receiver");
  }
  const Vec3 enu = ecef_to_enu_rotation(rx_pos) * d;
  const double el = std::asin(std::clamp(enu.z() / range, -1.0, 1.0));
  const double az = wrap_two_pi(std::atan2(enu.x(), enu.y()));
  return {el, az};
}

std::vector<OrbitElements> parse_constellation(std::string_view text) {
  std::vector<OrbitElements> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string id, tag, motion;
    double a, e, inc, raan, arg_lat;
    if (!(fields >> id)) continue;
    if (!(fields >> tag >> a >> e >> inc >> raan >> arg_lat >> motion)) {
      throw Error(ErrorCode::kParse, "constellation line " + std::to_string(line_no) +
                                         ": expected id, family and six orbital fields");
    }
    OrbitElements el;
    el.sat_id = id;
    el.family = parse_family(tag);
    el.semi_major_axis_m = a;
    el.eccentricity = e;
    el.inclination_rad = deg2rad(inc);
    el.raan_rad = wrap_two_pi(deg2rad(raan));
    el.arg_lat_at_epoch_rad = wrap_two_pi(deg2rad(arg_lat));
    if (motion == "auto") {
      el.mean_motion_rad_per_s = kepler_mean_motion(a);
    } else {
      try {
        el.mean_motion_rad_per_s = std::stod(motion);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParse, "constellation line " + std::to_string(line_no) +
                                           ": bad mean motion '" + motion + "'");
      }
    }
    if (e != 0.0) {
      throw Error(ErrorCode::kParse, "constellation line " + std::to_string(line_no) +
                                         ": only circular orbits are supported");
    }
    check_elements(el);
    for (const auto& prev : out) {
      if (prev.sat_id == el.sat_id)
        throw Error(ErrorCode::kParse, "duplicate satellite id " + el.sat_id);
    }
    out.push_back(std::move(el));
  }
  return out;
}

std::vector<OrbitElements> load_constellation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read constellation file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_constellation(buf.str());
}

}  // namespace vts::constellation
