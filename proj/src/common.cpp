#include "vts/common.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace vts {

double wrap_two_pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kGeometrySingular: return "geometry-singular";
    case ErrorCode::kInsufficientSatellites: return "insufficient-satellites";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDegenerateClock: return "degenerate-clock";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInsufficientReceivers: return "insufficient-receivers";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view component) {
  return splitmix64(master ^ fnv1a64(component));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

double keyed_normal(std::uint64_t key) {
  std::mt19937_64 engine(key);
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine);
}

Vec3 geocentric_to_ecef(double lat_rad, double lon_rad, double height_m) {
  const double r = kEarthRadius + height_m;
  return {r * std::cos(lat_rad) * std::cos(lon_rad),
          r * std::cos(lat_rad) * std::sin(lon_rad), r * std::sin(lat_rad)};
}

Eigen::Matrix3d ecef_to_enu_rotation(const Vec3& pos) {
  const double lon = std::atan2(pos.y(), pos.x());
  const double lat = std::atan2(pos.z(), std::hypot(pos.x(), pos.y()));
  const double sl = std::sin(lon), cl = std::cos(lon);
  const double sp = std::sin(lat), cp = std::cos(lat);
  Eigen::Matrix3d r;
  r << -sl, cl, 0.0,
       -sp * cl, -sp * sl, cp,
       cp * cl, cp * sl, sp;
  return r;
}

}  // namespace vts
