#include "doctest.h"

#include "oracles.hpp"
#include "vts/estimation.hpp"
#include "vts/visibility.hpp"

#include <cmath>
#include <random>

using namespace vts;
using namespace vts::estimation;

namespace {

const Vec3 kRx = geocentric_to_ecef(deg2rad(-27.4698), deg2rad(153.0251), 30.0);

// Satellite at (elevation, azimuth) and range r from rx.
Vec3 sat_at(const Vec3& rx, double el, double az, double r = 2.2e7) {
  const Vec3 enu(std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el));
  return rx + ecef_to_enu_rotation(rx).transpose() * enu * r;
}

std::vector<std::array<double, 4>> rows_of(const DesignMatrix& h) {
  std::vector<std::array<double, 4>> rows;
  for (Eigen::Index i = 0; i < h.rows(); ++i) rows.push_back({h(i, 0), h(i, 1), h(i, 2), h(i, 3)});
  return rows;
}

std::vector<SatelliteInput> visible_gps(const Vec3& rx, double t) {
  const auto all = constellation::build_nominal_constellation(constellation::ConstellationSet::kGps);
  const auto mask = visibility::VisibilityMask::open_sky();
  std::vector<SatelliteInput> out;
  for (const auto& el : all) {
    const auto s = constellation::propagate(el, t);
    const auto ea = constellation::elevation_azimuth(s.position_m, rx);
    if (mask.admits(ea.elevation_rad, ea.azimuth_rad)) out.push_back({el.sat_id, s, {}});
  }
  return out;
}

}  // namespace

TEST_CASE("regular tetrahedron DOP") {
  // Zenith plus three satellites 120 deg apart at asin(-1/3).
  const double low = std::asin(-1.0 / 3.0);
  std::vector<Vec3> sats{sat_at(kRx, kPi / 2, 0.0), sat_at(kRx, low, 0.0),
                         sat_at(kRx, low, deg2rad(120.0)), sat_at(kRx, low, deg2rad(240.0))};
  const auto h = design_matrix_enu(sats, kRx);
  const auto d = dop(h);
  CHECK(d.gdop == doctest::Approx(1.5811388300841898).epsilon(1e-9));
  CHECK(d.pdop == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(d.tdop == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(d.hdop == doctest::Approx(std::sqrt(1.5)).epsilon(1e-9));
  CHECK(d.vdop == doctest::Approx(std::sqrt(0.75)).epsilon(1e-9));
  CHECK(std::abs(d.gdop - oracle::gdop(rows_of(h))) < 1e-9);
}

TEST_CASE("DOP agrees with the cofactor oracle on random geometries") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> el(deg2rad(10.0), deg2rad(89.0));
  std::uniform_real_distribution<double> az(0.0, kTwoPi);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 4 + trial % 6;
    std::vector<Vec3> sats;
    for (int i = 0; i < n; ++i) sats.push_back(sat_at(kRx, el(rng), az(rng)));
    const auto h = design_matrix_enu(sats, kRx);
    const auto d = dop(h);
    if (!std::isfinite(d.gdop) || d.gdop > 1e3) continue;
    ++checked;
    CHECK(d.gdop * d.gdop == doctest::Approx(d.pdop * d.pdop + d.tdop * d.tdop).epsilon(1e-9));
    CHECK(d.pdop * d.pdop == doctest::Approx(d.hdop * d.hdop + d.vdop * d.vdop).epsilon(1e-9));
    CHECK(d.gdop == doctest::Approx(oracle::gdop(rows_of(h))).epsilon(1e-8));
    CHECK(d.tdop == doctest::Approx(oracle::tdop(rows_of(h))).epsilon(1e-8));
  }
  CHECK(checked > 900);
}

TEST_CASE("GDOP and TDOP do not depend on the frame") {
  std::vector<Vec3> sats{sat_at(kRx, 0.3, 0.1), sat_at(kRx, 0.9, 2.0), sat_at(kRx, 0.5, 3.7),
                         sat_at(kRx, 1.3, 5.0), sat_at(kRx, 0.2, 4.4)};
  const auto a = dop(design_matrix(sats, kRx));
  const auto b = dop(design_matrix_enu(sats, kRx));
  CHECK(a.gdop == doctest::Approx(b.gdop).epsilon(1e-12));
  CHECK(a.tdop == doctest::Approx(b.tdop).epsilon(1e-12));
}

TEST_CASE("noiseless PVT recovers the truth") {
  const auto sats = visible_gps(kRx, 1800.0);
  REQUIRE(sats.size() >= 4);
  ReceiverTruth truth{kRx, Vec3(12.0, -3.0, 0.5), 2.5e-4, 3e-8};
  const auto meas = simulate_pseudoranges(truth, sats, {});
  const auto sol = solve_pvt(meas);
  CHECK(sol.valid);
  CHECK(sol.nsat == static_cast<int>(sats.size()));
  CHECK((sol.position_m - kRx).norm() < 1e-6);
  CHECK(std::abs(sol.clock_bias_s - truth.clock_bias_s) < 1e-12);

  const auto vd = solve_velocity_drift(meas, sol);
  CHECK((vd.velocity_mps - truth.velocity_mps).norm() < 1e-6);
  CHECK(std::abs(vd.clock_drift_s_per_s - truth.clock_drift_s_per_s) < 1e-13);
}

TEST_CASE("clock error scatter follows TDOP") {
  const auto sats = visible_gps(kRx, 600.0);
  ReceiverTruth truth{kRx, Vec3::Zero(), 1e-3, 0.0};
  const double sigma = 5.0;
  std::vector<double> err;
  double tdop = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto meas = simulate_pseudoranges(truth, sats, {sigma, 0.0, mix_seed(3, k)});
    const auto sol = solve_pvt(meas);
    tdop = sol.dop.tdop;
    err.push_back(kSpeedOfLight * (sol.clock_bias_s - truth.clock_bias_s));
  }
  CHECK(oracle::rms(err) == doctest::Approx(sigma * tdop).epsilon(0.1));
}

TEST_CASE("simulated observations are reproducible") {
  const auto sats = visible_gps(kRx, 0.0);
  ReceiverTruth truth{kRx, Vec3::Zero(), 0.0, 0.0};
  const auto a = simulate_pseudoranges(truth, sats, {5.0, 0.1, 9});
  const auto b = simulate_pseudoranges(truth, sats, {5.0, 0.1, 9});
  const auto c = simulate_pseudoranges(truth, sats, {5.0, 0.1, 10});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].pseudorange_m == b[i].pseudorange_m);
  CHECK(a[0].pseudorange_m != c[0].pseudorange_m);
}

TEST_CASE("solver failures") {
  auto sats = visible_gps(kRx, 0.0);
  ReceiverTruth truth{kRx, Vec3::Zero(), 0.0, 0.0};
  auto meas = simulate_pseudoranges(truth, sats, {});
  meas.resize(3);
  try {
    solve_pvt(meas);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientSatellites);
  }

  // Four satellites along one line of sight.
  std::vector<SatelliteInput> line;
  for (int i = 0; i < 4; ++i) {
    line.push_back({"S" + std::to_string(i), {sat_at(kRx, 0.8, 1.0, 2.0e7 + 1e6 * i), Vec3::Zero(), 0.0}, {}});
  }
  try {
    solve_pvt(simulate_pseudoranges(truth, line, {}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGeometrySingular);
  }
}

TEST_CASE("timing uncertainty and static time solve") {
  DopValues d;
  d.gdop = 2.0;
  d.tdop = 1.0;
  const auto u = timing_uncertainty(3.0, d);
  CHECK(u.gdop_bound_s == doctest::Approx(6.0 / kSpeedOfLight));
  CHECK(u.tdop_bound_s == doctest::Approx(3.0 / kSpeedOfLight));

  auto sats = visible_gps(kRx, 0.0);
  sats.resize(1);
  sats[0].clock.offset_s = 2e-6;
  ReceiverTruth truth{kRx, Vec3::Zero(), 4e-5, 0.0};
  const auto st = static_time_solve(simulate_pseudoranges(truth, sats, {}), kRx, 3.0);
  CHECK(st.clock_bias_s == doctest::Approx(4e-5).epsilon(1e-9));
  CHECK(st.sigma_estimate_s == doctest::Approx(3.0 / kSpeedOfLight));
  CHECK_THROWS_AS(static_time_solve({}, kRx), Error);
}
