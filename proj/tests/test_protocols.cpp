#include "doctest.h"

#include "oracles.hpp"
#include "vts/protocols/protocols.hpp"

#include <cmath>
#include <set>

using namespace vts;
using namespace vts::protocols;

namespace {

// Parked vehicles on an east-west line.
std::vector<VehicleNode> parked(int n, double spacing_m, double duration_s, double skew = 0.0) {
  const Vec3 origin = geocentric_to_ecef(deg2rad(-27.4698), deg2rad(153.0251), 0.0);
  const auto rot = ecef_to_enu_rotation(origin).transpose();
  std::vector<VehicleNode> nodes;
  for (int k = 0; k < n; ++k) {
    VehicleNode v;
    v.id = k;
    v.trajectory = static_trajectory(origin + rot * Vec3(spacing_m * k, 0, 0), duration_s);
    // Alternating skews, offsets spread over a millisecond.
    v.clock = {k, 1.0 + (k % 2 ? skew : -skew), 1e-4 * ((k * 7) % 11) - 5e-4};
    nodes.push_back(std::move(v));
  }
  return nodes;
}

ChannelModel quiet(double range_m = 1000.0) {
  ChannelModel c;
  c.comm_range_m = range_m;
  c.tx = {100, 0};
  c.rx = {50, 0};
  return c;
}

SimConfig config(double duration, double warmup = 5.0) {
  SimConfig c;
  c.duration_s = duration;
  c.warmup_s = warmup;
  return c;
}

const PairTrace& trace_for(const SyncResult& r, int node) {
  for (const auto& p : r.pairs) {
    if (p.node_b == node) return p;
  }
  throw std::runtime_error("no trace");
}

std::vector<double> pooled(const SyncResult& r, std::size_t stride) {
  std::vector<double> v;
  for (const auto& p : r.pairs) {
    for (std::size_t k = 0; k < p.t.size(); k += stride) {
      if (p.t[k] >= r.warmup_s) v.push_back(p.error_s[k]);
    }
  }
  return v;
}

}  // namespace

TEST_CASE("event queue order") {
  EventQueue q;
  std::vector<int> seen;
  q.schedule(2.0, 0, [&](double) { seen.push_back(4); });
  q.schedule(1.0, 5, [&](double) { seen.push_back(3); });
  q.schedule(1.0, 1, [&](double) { seen.push_back(1); });
  q.schedule(1.0, 1, [&](double t) {
    seen.push_back(2);
    q.schedule(t, 1, [&](double) { seen.push_back(22); });
  });
  q.schedule(3.0, 0, [&](double) { seen.push_back(9); });
  q.run_until(3.0);
  CHECK(seen == std::vector<int>{1, 2, 22, 3, 4});
  CHECK_FALSE(q.empty());
}

TEST_CASE("protocol names") {
  CHECK(parse_protocol("ftsp") == Protocol::kFtsp);
  CHECK(known_protocols().size() == 5);
  try {
    parse_protocol("ntp");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gnss, tpsn, rbs, ftsp, cts") != std::string::npos);
  }
}

TEST_CASE("TPSN with symmetric delays has no error") {
  const auto nodes = parked(5, 600.0, 30.0);
  const auto r = run_tpsn(nodes, quiet(), 0, 30, config(30.0));
  CHECK(r.unsynchronized.empty());
  CHECK(r.summary.n > 0);
  CHECK(r.summary.peak_s < 1e-12);
  for (int k = 0; k < 5; ++k) CHECK(r.hop_count.at(k) == k);
}

TEST_CASE("TPSN error is half the delay asymmetry per hop") {
  auto ch = quiet();
  for (int k = 1; k < 5; ++k) ch.node_rx_bias_us[k] = 10.0 * k;
  const auto nodes = parked(5, 600.0, 30.0);
  const auto r = run_tpsn(nodes, ch, 0, 30, config(30.0));
  for (int k = 1; k < 5; ++k) {
    const auto& tr = trace_for(r, k);
    // Each hop: down delay exceeds up delay by 10 us.
    CHECK(std::abs(tr.error_s.back()) == doctest::Approx(5e-6 * k).epsilon(1e-6));
  }
}

TEST_CASE("RBS results do not depend on the sender clock") {
  auto a = parked(6, 100.0, 40.0, 3e-7);
  auto b = a;
  b[0].clock.offset_s += 0.37;
  b[0].clock.drift_rate = 1.0 - 4e-5;
  RbsOptions opt;
  opt.beacon_node = 0;
  const auto ch = calibrated_channel(Protocol::kRbs, 3);
  const auto ra = run_rbs(a, ch, 40, config(40.0), opt);
  const auto rb = run_rbs(b, ch, 40, config(40.0), opt);
  REQUIRE(ra.pairs.size() == rb.pairs.size());
  for (std::size_t p = 0; p < ra.pairs.size(); ++p) {
    REQUIRE(ra.pairs[p].error_s.size() == rb.pairs[p].error_s.size());
    for (std::size_t k = 0; k < ra.pairs[p].error_s.size(); ++k) {
      CHECK(std::abs(ra.pairs[p].error_s[k] - rb.pairs[p].error_s[k]) < 1e-10);
    }
  }
  CHECK(std::find(ra.unsynchronized.begin(), ra.unsynchronized.end(), 0) != ra.unsynchronized.end());
  CHECK(ra.reference_node == 1);
}

TEST_CASE("RBS needs two receivers") {
  const auto nodes = parked(2, 100.0, 10.0);
  try {
    run_rbs(nodes, quiet(), 5, config(10.0, 1.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientReceivers);
  }
}

TEST_CASE("FTSP without jitter is limited by propagation") {
  const auto nodes = parked(6, 30.0, 120.0, 5e-6);
  const auto r = run_ftsp(nodes, quiet(), 120.0, 1.0, config(120.0, 30.0));
  CHECK(r.unsynchronized.empty());
  // 150 m to the farthest node from the root
  CHECK(r.summary.peak_s <= 150.0 / kSpeedOfLight + 1e-9);
}

TEST_CASE("FTSP regression recovers the skew") {
  auto nodes = parked(3, 30.0, 200.0);
  nodes[0].clock.drift_rate = 1.0;
  nodes[1].clock.drift_rate = 1.0 + 1e-6;
  nodes[2].clock.drift_rate = 1.0 - 2e-6;
  const auto est = ftsp_final_skews(nodes, calibrated_channel(Protocol::kFtsp, 1), 200.0, 1.0,
                                    config(200.0, 30.0));
  REQUIRE(est.size() == 3);
  for (const auto& e : est) {
    const double truth = 1.0 / nodes[static_cast<std::size_t>(e.node_id)].clock.drift_rate - 1.0;
    if (e.node_id == 0) continue;
    CHECK(e.skew - 1.0 == doctest::Approx(truth).epsilon(0.1));
  }
}

TEST_CASE("FTSP re-elects a root when the root leaves") {
  auto nodes = parked(5, 30.0, 120.0, 1e-6);
  nodes[0].active_until = 40.0;
  const auto r = run_ftsp(nodes, calibrated_channel(Protocol::kFtsp, 2), 120.0, 1.0, config(120.0, 10.0));
  bool new_root = false;
  for (const auto& p : r.pairs) {
    if (p.node_a == 1 && !p.t.empty()) {
      new_root = true;
      CHECK(p.t.back() > 100.0);
      CHECK(std::abs(p.error_s.back()) < 20e-6);
    }
  }
  CHECK(new_root);
}

TEST_CASE("CTS merges a small group into a larger one") {
  const auto nodes = parked(8, 30.0, 20.0, 1e-6);
  CtsOptions opt;
  opt.initial_groups = {{0, 1, 2}, {3, 4, 5, 6, 7}};
  std::vector<CtsGroupSnapshot> snaps;
  const auto r = run_cts(nodes, calibrated_channel(Protocol::kCts, 4), 20.0, config(20.0, 3.0), opt, &snaps);
  REQUIRE(!snaps.empty());
  for (const auto& [id, g] : snaps.front().group_of) CHECK(g == 3);
  CHECK(r.unsynchronized.empty());
  CHECK(r.reference_node == 3);
  CHECK(r.summary.peak_s < 100e-6);
}

TEST_CASE("GNSS sync requires a PPS model") {
  const auto nodes = parked(3, 30.0, 10.0);
  try {
    run_gnss_sync(nodes, config(10.0, 1.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfiguration);
  }
}

TEST_CASE("GNSS sync error does not depend on node count") {
  std::vector<std::vector<double>> samples;
  for (int n : {2, 10, 50}) {
    auto nodes = parked(n, 30.0, 600.0, 1e-7);
    for (auto& v : nodes) v.pps = clocks::pps_preset_receiver(clocks::PpsPreset::kSameModel, 9, v.id);
    const auto r = run_gnss_sync(nodes, config(600.0, 60.0));
    CHECK(r.message_count == 0);
    CHECK(r.pairs.size() == static_cast<std::size_t>(n - 1));
    samples.push_back(pooled(r, 7));
  }
  CHECK(oracle::ks_two_sample(samples[0], samples[1]).p_value > 0.01);
  CHECK(oracle::ks_two_sample(samples[0], samples[2]).p_value > 0.01);
  CHECK(oracle::ks_two_sample(samples[1], samples[2]).p_value > 0.01);
}

TEST_CASE("GNSS outage and holdover") {
  auto nodes = parked(2, 30.0, 300.0, 1e-6);
  for (auto& v : nodes) v.pps = clocks::pps_preset_receiver(clocks::PpsPreset::kSameModel, 1, v.id);
  nodes[1].gnss = AvailabilityTrace({{0.0, true}, {100.0, false}, {200.0, true}});
  const auto r = run_gnss_sync(nodes, config(300.0, 10.0));
  const auto& tr = trace_for(r, 1);
  double worst_in = 0.0, worst_out = 0.0;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double e = std::abs(tr.error_s[k]);
    if (tr.t[k] < 100.0 || tr.t[k] > 200.5) worst_in = std::max(worst_in, e);
    if (tr.t[k] > 100.0 && tr.t[k] < 200.0) worst_out = std::max(worst_out, e);
  }
  CHECK(worst_in < 200e-9);
  CHECK(worst_out > 10e-6);  // about 2e-6 * 100 s at the end of the outage
}

TEST_CASE("summaries recompute from the traces and runs repeat") {
  auto nodes = platoon_nodes({}, 42);
  for (auto& v : nodes) v.pps = clocks::pps_preset_receiver(clocks::PpsPreset::kSameModel, 42, v.id);
  CompareSpec spec;
  spec.nodes = nodes;
  spec.config = config(120.0, 30.0);
  spec.protocols = {Protocol::kGnss, Protocol::kTpsn, Protocol::kRbs, Protocol::kFtsp, Protocol::kCts};
  spec.seed = 42;
  const auto a = compare_protocols(spec);
  const auto b = compare_protocols(spec);
  REQUIRE(a.results.size() == 5);
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    const auto& ra = a.results[i];
    const auto re = summarize_pairs(ra.pairs, ra.warmup_s);
    CHECK(re.rms_s == ra.summary.rms_s);
    CHECK(re.peak_s == ra.summary.peak_s);
    CHECK(ra.summary.rms_s == b.results[i].summary.rms_s);
    CHECK(ra.message_count == b.results[i].message_count);
  }
  CHECK(a.results[a.ranking.front()].protocol == Protocol::kGnss);
  REQUIRE(a.separation_ratio.has_value());
  CHECK(*a.separation_ratio == *b.separation_ratio);
}

TEST_CASE("summary of absolute errors") {
  PairTrace p{0, 1, {0.0, 1.0, 2.0, 3.0}, {5.0, -3.0, 3.0, -3.0}};
  const auto s = summarize_pairs({p}, 1.0);
  CHECK(s.n == 3);
  CHECK(s.mean_abs_s == doctest::Approx(3.0));
  CHECK(s.std_abs_s == doctest::Approx(0.0));
  CHECK(s.rms_s == doctest::Approx(3.0));
  CHECK(s.peak_s == 3.0);
}

TEST_CASE("channel validation") {
  auto ch = quiet();
  ch.rx.jitter_us = -1.0;
  CHECK_THROWS_AS(Network(parked(2, 10.0, 10.0), ch), Error);
  auto dup = parked(2, 10.0, 10.0);
  dup[1].id = 0;
  CHECK_THROWS_AS(Network(dup, quiet()), Error);
}
