#include "doctest.h"

#include "oracles.hpp"
#include "vts/clocks.hpp"

#include <cmath>
#include <random>

using namespace vts;
using namespace vts::clocks;

TEST_CASE("GPS to UTC with the leap second offset") {
  const auto s = gps_to_utc(1000.05, 0.05, 18.0);
  CHECK(s.t_gps == 1000.0);
  CHECK(s.t_utc == 982.0);
  CHECK(receiver_time_from_utc(s.t_utc, 0.05, 18.0) == doctest::Approx(1000.05).epsilon(1e-15));
  CHECK(gps_to_utc(500.0, 0.0).t_utc == 482.0);
}

TEST_CASE("relative clock parameters close the relation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> drift(-5e-5, 5e-5);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> when(0.0, 86400.0);
  for (int i = 0; i < 200; ++i) {
    const QuartzClock c1{1, 1.0 + drift(rng), off(rng)};
    const QuartzClock c2{2, 1.0 + drift(rng), off(rng)};
    const auto p = relative_clock_params(c1, c2);
    CHECK(p.theta == doctest::Approx(c1.drift_rate / c2.drift_rate));
    for (int k = 0; k < 5; ++k) {
      const double t = when(rng);
      CHECK(std::abs(read_clock(c1, t) - (p.theta * read_clock(c2, t) + p.beta_s)) < 1e-9);
    }
  }
  const QuartzClock same{3, 1.00001, 0.2};
  const auto id = relative_clock_params(same, same);
  CHECK(id.theta == 1.0);
  CHECK(id.beta_s == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("degenerate and out-of-range clocks") {
  try {
    relative_clock_params({1, 1.0, 0.0}, {2, 0.0, 0.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateClock);
  }
  CHECK_THROWS_AS(check_clock({1, 1.001, 0.0}), Error);
  CHECK_NOTHROW(check_clock({1, 1.0 - 5e-5, 0.0}));
}

TEST_CASE("PPS generator") {
  PpsErrorModel m;
  m.jitter_std_ns = 15.0;
  m.bias_ns = 4.0;
  m.seed = 21;
  const auto v = generate_pps_offsets(m, 50000);
  CHECK(oracle::mean(v) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(oracle::population_std(v) == doctest::Approx(15.0).epsilon(0.02));
  CHECK(pps_offset_at(m, 123) == v[123]);

  m.jitter_std_ns = -1.0;
  CHECK_THROWS_AS(generate_pps_offsets(m, 10), Error);
}

TEST_CASE("AR(1) wander has the requested spread") {
  PpsErrorModel m;
  m.drift = {10.0, 100.0};
  m.seed = 8;
  const auto v = generate_pps_offsets(m, 200000);
  CHECK(oracle::population_std(v) == doctest::Approx(10.0).epsilon(0.1));
  // lag-100 autocorrelation near exp(-1)
  const double mu = oracle::mean(v);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k + 100 < v.size(); ++k) num += (v[k] - mu) * (v[k + 100] - mu);
  for (double x : v) den += (x - mu) * (x - mu);
  CHECK(num / den == doctest::Approx(std::exp(-1.0)).epsilon(0.15));
}

TEST_CASE("shared drift seed cancels in the difference") {
  PpsErrorModel a, b;
  a.drift = b.drift = {20.0, 600.0};
  a.seed = 1;
  b.seed = 2;
  a.drift_seed = b.drift_seed = 77;
  const auto s = pairwise_pps_series(a, b, 1000);
  for (const auto& x : s.samples) CHECK(x.offset_ns == doctest::Approx(0.0));
  CHECK(s.samples[10].t_s == 10.0);
}

TEST_CASE("preset pairs") {
  const double day = 86400;
  {
    const auto [a, b] = pps_preset_pair(PpsPreset::kSameModel, 3);
    const auto st = analysis::offset_statistics(pairwise_pps_series(a, b, day));
    CHECK(st.std == doctest::Approx(12.2).epsilon(0.25));
    CHECK(std::abs(st.mean) <= 5.0);
  }
  {
    const auto [a, b] = pps_preset_pair(PpsPreset::kDiffModel, 3);
    const auto st = analysis::offset_statistics(pairwise_pps_series(a, b, day));
    CHECK(st.std == doctest::Approx(30.0).epsilon(0.25));
    CHECK(st.peak_abs <= 200.0);
  }
  CHECK(parse_pps_preset("SAME_MODEL") == PpsPreset::kSameModel);
  CHECK(parse_pps_preset("diff-model") == PpsPreset::kDiffModel);
  CHECK_THROWS_AS(parse_pps_preset("other"), Error);
}

TEST_CASE("disciplined clock follows the pulses") {
  const QuartzClock c{1, 1.0 + 2e-6, 0.05};
  analysis::OffsetSeries pps;
  for (int k = 1; k <= 100; ++k) {
    if (k > 40 && k <= 60) continue;  // outage
    pps.samples.push_back({static_cast<double>(k), 0.0});
  }
  const auto d = discipline_clock(c, pps);
  CHECK(d.error(0.5) == doctest::Approx(read_clock(c, 0.5) - 0.5));
  CHECK(std::abs(d.error(10.5)) < 2e-6);
  CHECK(std::abs(d.error(10.0)) < 1e-12);
  // holdover: error grows with the drift since the last pulse
  CHECK(d.error(59.5) == doctest::Approx(2e-6 * 19.5).epsilon(1e-6));
  CHECK(std::abs(d.error(61.0)) < 1e-12);
  CHECK(d.step_count() == 0);
  CHECK(d.latest(40.9)->edge_time == 40.0);
  CHECK(d.latest(0.9) == nullptr);
}

TEST_CASE("register steps at the adjust limit") {
  const QuartzClock c{1, 1.0 + 5e-5, 0.2};
  analysis::OffsetSeries pps;
  for (int k = 1; k <= 3000; ++k) pps.samples.push_back({static_cast<double>(k), 0.0});
  const auto d = discipline_clock(c, pps, 0.1);
  CHECK(d.updates().front().stepped);
  // 0.2 s initial, then 0.1 s of drift every 2000 s.
  CHECK(d.step_count() == 2);
  CHECK(std::abs(d.register_reading(1.0) - 1.0) < 1e-9);
  CHECK(std::abs(d.register_reading(1999.0) - 1999.0) < 0.1);

  CHECK_THROWS_AS(discipline_clock(c, {}), Error);
  CHECK_THROWS_AS(discipline_clock(c, pps, 0.0), Error);
}
