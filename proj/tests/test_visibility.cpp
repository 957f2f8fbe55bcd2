#include "doctest.h"

#include "vts/visibility.hpp"

#include <cmath>

using namespace vts;
using namespace vts::visibility;
using constellation::ConstellationSet;

namespace {

const Vec3 kBrisbane = geocentric_to_ecef(deg2rad(-27.4698), deg2rad(153.0251), 30.0);

}  // namespace

TEST_CASE("open-sky mask is strict at the cutoff") {
  const auto m = VisibilityMask::open_sky(deg2rad(10.0));
  CHECK_FALSE(m.admits(deg2rad(10.0), 1.0));
  CHECK(m.admits(deg2rad(10.0001), 1.0));
  CHECK(m.min_elevation_at(5.0) == doctest::Approx(deg2rad(10.0)));
}

TEST_CASE("sector masks validate their layout") {
  const double b = deg2rad(5.0);
  CHECK_NOTHROW(VisibilityMask({{0.0, kPi, deg2rad(20.0)}, {kPi, kTwoPi, deg2rad(5.0)}}, b));
  // gap
  CHECK_THROWS_AS(VisibilityMask({{0.0, 3.0, b}, {3.1, kTwoPi, b}}, b), Error);
  // below the base cutoff
  CHECK_THROWS_AS(VisibilityMask({{0.0, kTwoPi, deg2rad(2.0)}}, b), Error);
  // does not reach 2 pi
  CHECK_THROWS_AS(VisibilityMask({{0.0, 6.0, b}}, b), Error);

  VisibilityMask m({{0.0, kPi, deg2rad(20.0)}, {kPi, kTwoPi, deg2rad(5.0)}}, b);
  CHECK(m.min_elevation_at(1.0) == doctest::Approx(deg2rad(20.0)));
  CHECK(m.min_elevation_at(4.0) == doctest::Approx(deg2rad(5.0)));
}

TEST_CASE("canyon profile opens along the street") {
  CanyonProfile p{"deep", deg2rad(60.0), deg2rad(10.0), deg2rad(15.0)};
  const auto m = p.mask(0.0, deg2rad(10.0));
  CHECK(rad2deg(m.min_elevation_at(deg2rad(0.0))) == doctest::Approx(15.0));
  CHECK(rad2deg(m.min_elevation_at(deg2rad(355.0))) == doctest::Approx(15.0));
  CHECK(rad2deg(m.min_elevation_at(deg2rad(180.0))) == doctest::Approx(15.0));
  CHECK(rad2deg(m.min_elevation_at(deg2rad(90.0))) == doctest::Approx(60.0));
  CHECK(rad2deg(m.min_elevation_at(deg2rad(200.0))) == doctest::Approx(60.0));

  // Street running 355 deg: the corridor wraps through north.
  const auto w = p.mask(deg2rad(355.0), deg2rad(10.0));
  CHECK(rad2deg(w.min_elevation_at(deg2rad(3.0))) == doctest::Approx(15.0));
  CHECK(rad2deg(w.min_elevation_at(deg2rad(7.0))) == doctest::Approx(60.0));
}

TEST_CASE("mask model follows the trajectory profile") {
  const auto model = MaskModel::canyon({{"open", deg2rad(10.0), 0.0, deg2rad(10.0)},
                                        {"deep", deg2rad(70.0), deg2rad(5.0), deg2rad(20.0)}});
  TrajectoryPoint p{0.0, kBrisbane, 0.0, 1};
  CHECK(rad2deg(model.at(p).min_elevation_at(deg2rad(90.0))) == doctest::Approx(70.0));
  p.profile = 0;
  CHECK(rad2deg(model.at(p).min_elevation_at(deg2rad(90.0))) == doctest::Approx(10.0));
}

TEST_CASE("epoch classes") {
  CHECK(classify_epoch(4) == EpochClass::kGe4);
  CHECK(classify_epoch(12) == EpochClass::kGe4);
  CHECK(classify_epoch(3) == EpochClass::kOneToThree);
  CHECK(classify_epoch(1) == EpochClass::kOneToThree);
  CHECK(classify_epoch(0) == EpochClass::kZero);
  CHECK_THROWS_AS(classify_epoch(-1), Error);
}

TEST_CASE("epoch times are end exclusive") {
  const auto tr = static_trajectory(kBrisbane, 100.0);
  const auto t = epoch_times(tr, 10.0);
  CHECK(t.size() == 10);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 90.0);
  CHECK(epoch_times(Trajectory({{5.0, kBrisbane, 0.0, 0}}), 10.0).size() == 1);
  CHECK_THROWS_AS(epoch_times(tr, 0.0), Error);
}

TEST_CASE("open sky GPS keeps four or more satellites all day") {
  const auto all = constellation::build_nominal_constellation(ConstellationSet::kGpsPlusBds);
  const auto res = availability_summary(constellation::select(all, ConstellationSet::kGps),
                                        static_trajectory(kBrisbane, 86400.0),
                                        MaskModel::fixed(VisibilityMask::open_sky()), 60.0);
  CHECK(res.report.epoch_count == 1440);
  CHECK(res.report.pct_ge4 == 100.0);
  CHECK(res.report.pct_gdop_ok + res.report.pct_gdop_high + res.report.pct_nsat_lt4 ==
        doctest::Approx(100.0));
}

TEST_CASE("combined visibility is the union of the parts") {
  const auto all = constellation::build_nominal_constellation(ConstellationSet::kGpsPlusBds);
  const auto drive = street_drive(-27.4698, 153.0251, {{28, 300, 8, 0}, {118, 300, 8, 0}}, 1.0);
  const auto model = MaskModel::canyon({{"deep", deg2rad(50.0), deg2rad(12.0), deg2rad(20.0)}});
  const auto res = availability_for_sets(
      all, {ConstellationSet::kGps, ConstellationSet::kBds, ConstellationSet::kGpsPlusBds}, drive, model, 5.0);
  REQUIRE(res.size() == 3);
  for (std::size_t e = 0; e < res[0].records.size(); ++e) {
    CHECK(res[2].records[e].nsat == res[0].records[e].nsat + res[1].records[e].nsat);
  }
  for (const auto& r : res) {
    const auto& a = r.report;
    CHECK(a.pct_ge4 + a.pct_one_to_three + a.pct_zero == doctest::Approx(100.0));
    CHECK(a.pct_nsat_lt4 == doctest::Approx(100.0 - a.pct_ge4));
    CHECK(a.pct_gdop_ok <= a.pct_ge4);
  }
  CHECK(res[2].report.pct_ge4 >= res[0].report.pct_ge4);
  CHECK(res[2].report.pct_ge4 >= res[1].report.pct_ge4);
}

TEST_CASE("records carry GDOP only with four satellites") {
  const auto all = constellation::build_nominal_constellation(ConstellationSet::kGps);
  const auto model = MaskModel::fixed(VisibilityMask::open_sky(deg2rad(60.0)));
  const auto res = availability_summary(all, static_trajectory(kBrisbane, 3600.0), model, 60.0);
  for (const auto& rec : res.records) {
    CHECK(rec.gdop.has_value() == (rec.nsat >= 4));
    CHECK(static_cast<int>(rec.visible_ids.size()) == rec.nsat);
  }
}
