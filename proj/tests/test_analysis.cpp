#include "doctest.h"

#include "oracles.hpp"
#include "vts/analysis.hpp"

#include <cmath>
#include <random>

using namespace vts;
using namespace vts::analysis;

namespace {

OffsetSeries series_of(const std::vector<double>& v, double dt = 1.0) {
  OffsetSeries s;
  for (std::size_t k = 0; k < v.size(); ++k) s.samples.push_back({dt * static_cast<double>(k), v[k]});
  return s;
}

std::string error_text(const std::string& csv) {
  try {
    parse_offset_csv(csv);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("statistics of a square wave") {
  const std::vector<double> v{10, -10, 10, -10};
  const auto s = summarize(v);
  CHECK(s.mean == 0.0);
  CHECK(s.rms == 10.0);
  CHECK(s.std == 10.0);
  CHECK(s.peak_pos == 10.0);
  CHECK(s.peak_neg == -10.0);
  CHECK(s.peak_abs == 10.0);
  CHECK(s.n == 4);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
}

TEST_CASE("statistics against the oracle") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(3.0, 7.0);
  std::vector<double> v(5000);
  for (auto& x : v) x = n(rng);
  const auto s = summarize(v);
  CHECK(s.mean == doctest::Approx(oracle::mean(v)).epsilon(1e-12));
  CHECK(s.std == doctest::Approx(oracle::population_std(v)).epsilon(1e-10));
  CHECK(s.rms == doctest::Approx(oracle::rms(v)).epsilon(1e-12));
  CHECK(s.rms * s.rms == doctest::Approx(s.mean * s.mean + s.std * s.std).epsilon(1e-10));
}

TEST_CASE("moving window mean") {
  std::vector<double> v(11);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k);
  const auto m = moving_window_mean(series_of(v), 4.0);
  REQUIRE(m.size() == 7);
  CHECK(m.samples.front().t_s == 2.0);
  CHECK(m.samples.back().t_s == 8.0);
  // A linear ramp averages to its centre.
  for (const auto& s : m.samples) CHECK(s.offset_ns == doctest::Approx(s.t_s));
  // Window longer than the span.
  CHECK_THROWS_AS(moving_window_mean(series_of(v), 20.0), Error);
}

TEST_CASE("ordering is enforced") {
  OffsetSeries s;
  s.samples = {{0.0, 1.0}, {0.0, 2.0}};
  CHECK_THROWS_AS(s.check_ordered(), Error);
}

TEST_CASE("guard interval gain") {
  CHECK(guard_interval_gain(2016, 496e-6, 10e-6) == 40);
  CHECK(guard_interval_gain(100, 1e-3, 1e-3) == 100);
  CHECK(guard_interval_gain(100, 1e-3, 0.0) == 0);
  CHECK_THROWS_AS(guard_interval_gain(0, 1e-3, 1e-6), Error);
  CHECK_THROWS_AS(guard_interval_gain(10, 0.0, 1e-6), Error);
}

TEST_CASE("ranging and position calculators") {
  CHECK(ranging_error(10e-9) == doctest::Approx(2.99792458).epsilon(1e-12));
  const double v = 110.0 / 3.6;
  CHECK(relative_position_error(v, 10e-3) == doctest::Approx(0.30555555555555555));
  CHECK(relative_position_error(v, 3e-3) == doctest::Approx(0.09166666666666666));
  CHECK(required_timing_accuracy(v, 0.3) == doctest::Approx(0.3 / v));
  CHECK_THROWS_AS(required_timing_accuracy(0.0, 1.0), Error);
}

TEST_CASE("offset CSV round trip") {
  const auto s = series_of({1.5, -2.25, 0.0, 1e-3});
  const auto back = parse_offset_csv(format_offset_csv(s));
  REQUIRE(back.size() == s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(back.samples[k].t_s == s.samples[k].t_s);
    CHECK(back.samples[k].offset_ns == s.samples[k].offset_ns);
  }
  CHECK(parse_offset_csv("# bench\nt_s,offset_ns\n0,1\n# mid\n1,2\n").size() == 2);
}

TEST_CASE("offset CSV errors name the line") {
  CHECK(error_text("t,x\n0,1\n").find("line 1") != std::string::npos);
  CHECK(error_text("t_s,offset_ns\n0,1\n1,abc\n").find("line 3") != std::string::npos);
  CHECK(error_text("t_s,offset_ns\n0,1\n1\n").find("line 3") != std::string::npos);
  CHECK(error_text("t_s,offset_ns\n1,1\n0,2\n").find("line 3") != std::string::npos);
  CHECK(error_text("").size() > 0);
}

TEST_CASE("stats table") {
  const auto t = format_stats_table({{"same-model", summarize(std::vector<double>{1, -1})}});
  CHECK(t.find("Peak") != std::string::npos);
  CHECK(t.find("RMS") != std::string::npos);
  CHECK(t.find("same-model") != std::string::npos);
}
