#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vts {

using Vec3 = Eigen::Vector3d;

// Physical constants shared by every module.
inline constexpr double kSpeedOfLight = 299'792'458.0;      // m/s
inline constexpr double kGmEarth = 3.986004418e14;          // m^3/s^2
inline constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s
inline constexpr double kEarthRadius = 6'378'137.0;         // m
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double angle);

enum class ErrorCode {
  kDegenerateGeometry,
  kGeometrySingular,
  kInsufficientSatellites,
  kNonConvergence,
  kDegenerateClock,
  kEmptyInput,
  kInvalidArgument,
  kInsufficientReceivers,
  kConfiguration,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Seeds -----------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Sub-seed for a named component: splitmix64(master ^ fnv1a64(name)).
/// Pure in (master, name), so output content never depends on run order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component);

/// Mixes an ordered list of integer keys into a seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0);

/// Standard normal draw addressed by key. Two calls with the same key return
/// the same value regardless of what else was drawn in between.
double keyed_normal(std::uint64_t key);

/// Sequential gaussian stream.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return dist_(engine_); }
  double next(double sigma) { return sigma * dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

// Earth geometry --------------------------------------------------------

/// Spherical-earth point at the given latitude/longitude and height above
/// kEarthRadius.
Vec3 geocentric_to_ecef(double lat_rad, double lon_rad, double height_m = 0.0);

/// Rotation taking ECEF vectors into the local east-north-up frame at pos
/// (geocentric up).
Eigen::Matrix3d ecef_to_enu_rotation(const Vec3& pos);

}  // namespace vts
