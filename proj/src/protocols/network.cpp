#include "vts/protocols/network.hpp"

#include "vts/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace vts::protocols {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kGnss: return "gnss";
    case Protocol::kTpsn: return "tpsn";
    case Protocol::kRbs: return "rbs";
    case Protocol::kFtsp: return "ftsp";
    case Protocol::kCts: return "cts";
  }
  return "?";
}

std::vector<std::string> known_protocols() { return {"gnss", "tpsn", "rbs", "ftsp", "cts"}; }

Protocol parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::kGnss, Protocol::kTpsn, Protocol::kRbs, Protocol::kFtsp, Protocol::kCts}) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorCode::kConfiguration,
              "unknown protocol '" + std::string(name) + "' (known: gnss, tpsn, rbs, ftsp, cts)");
}

ChannelModel calibrated_channel(Protocol p, std::uint64_t seed) {
  ChannelModel c;
  c.seed = seed;
  switch (p) {
    case Protocol::kTpsn:
      // Sender stamps at the MAC; receive-side interrupt latency dominates.
      c.tx = {100.0, 0.0};
      c.rx = {50.0, 25.0};
      break;
    case Protocol::kRbs:
      c.tx = {100.0, 50.0};
      c.rx = {50.0, 8.0};
      break;
    case Protocol::kFtsp:
      // Only the residual jitter of MAC-layer timestamps is seen.
      c.tx = {100.0, 1.7};
      c.rx = {50.0, 1.7};
      break;
    case Protocol::kCts:
      c.tx = {100.0, 8.0};
      c.rx = {50.0, 8.0};
      break;
    case Protocol::kGnss:
      c.tx = {100.0, 10.0};
      c.rx = {50.0, 10.0};
      break;
  }
  return c;
}

AvailabilityTrace::AvailabilityTrace(std::vector<std::pair<double, bool>> changes)
    : changes_(std::move(changes)) {
  if (changes_.empty()) changes_.push_back({0.0, true});
  for (std::size_t i = 1; i < changes_.size(); ++i) {
    if (!(changes_[i].first > changes_[i - 1].first)) {
      throw Error(ErrorCode::kInvalidArgument, "availability change points must increase");
    }
  }
}

bool AvailabilityTrace::available(double t) const {
  auto it = std::upper_bound(changes_.begin(), changes_.end(), t,
                             [](double v, const std::pair<double, bool>& c) { return v < c.first; });
  if (it == changes_.begin()) return changes_.front().second;
  return (it - 1)->second;
}

SyncSummary summarize_pairs(const std::vector<PairTrace>& pairs, double warmup_s) {
  std::vector<double> abs_err;
  for (const auto& p : pairs) {
    for (std::size_t i = 0; i < p.t.size(); ++i) {
      if (p.t[i] >= warmup_s) abs_err.push_back(std::abs(p.error_s[i]));
    }
  }
  SyncSummary s;
  if (abs_err.empty()) return s;
  const auto st = analysis::summarize(abs_err);
  s.mean_abs_s = st.mean;
  s.std_abs_s = st.std;
  s.rms_s = st.rms;
  s.peak_s = st.peak_abs;
  s.n = st.n;
  return s;
}

void EventQueue::schedule(double t, int node_id, Action action) {
  queue_.push(Event{t, node_id, next_seq_++, std::move(action)});
}

void EventQueue::run_until(double t_end) {
  while (!queue_.empty() && queue_.top().t < t_end) {
    Event ev = queue_.top();
    queue_.pop();
    ev.action(ev.t);
  }
}

Network::Network(const std::vector<VehicleNode>& nodes, ChannelModel channel)
    : nodes_(nodes),
      channel_(std::move(channel)),
      tx_seed_(derive_seed(channel_.seed, "channel.tx")),
      rx_seed_(derive_seed(channel_.seed, "channel.rx")) {
  std::set<int> ids;
  for (const auto& n : nodes_) {
    if (!ids.insert(n.id).second) {
      throw Error(ErrorCode::kConfiguration, "duplicate node id " + std::to_string(n.id));
    }
    if (n.trajectory.empty()) {
      throw Error(ErrorCode::kConfiguration, "node " + std::to_string(n.id) + " has no trajectory");
    }
  }
  for (const DelayModel& d : {channel_.tx, channel_.rx}) {
    if (d.mean_us < 0.0 || d.jitter_us < 0.0) {
      throw Error(ErrorCode::kConfiguration, "channel delay parameters must be >= 0");
    }
  }
  if (!(channel_.comm_range_m > 0.0)) throw Error(ErrorCode::kConfiguration, "range must be > 0");
}

std::size_t Network::index_of(int node_id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == node_id) return i;
  }
  throw Error(ErrorCode::kConfiguration, "no node with id " + std::to_string(node_id));
}

bool Network::active(std::size_t i, double t) const {
  return !nodes_[i].active_until || t < *nodes_[i].active_until;
}

Vec3 Network::position(std::size_t i, double t) const { return nodes_[i].trajectory.at(t).position_m; }

bool Network::in_range(std::size_t a, std::size_t b, double t) const {
  if (a == b || !active(a, t) || !active(b, t)) return false;
  return (position(a, t) - position(b, t)).norm() <= channel_.comm_range_m;
}

std::vector<std::size_t> Network::neighbors(std::size_t i, double t) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    if (in_range(i, j, t)) out.push_back(j);
  }
  return out;
}

double Network::propagation_s(std::size_t a, std::size_t b, double t) const {
  return (position(a, t) - position(b, t)).norm() / kSpeedOfLight;
}

double Network::tx_delay_s(std::uint64_t msg) const {
  const double z = keyed_normal(mix_seed(tx_seed_, msg));
  return 1e-6 * std::max(0.0, channel_.tx.mean_us + channel_.tx.jitter_us * z);
}

double Network::rx_delay_s(std::uint64_t msg, std::size_t receiver) const {
  const int id = nodes_[receiver].id;
  const double z = keyed_normal(mix_seed(rx_seed_, msg, static_cast<std::uint64_t>(id)));
  double bias = 0.0;
  if (auto it = channel_.node_rx_bias_us.find(id); it != channel_.node_rx_bias_us.end()) bias = it->second;
  return 1e-6 * std::max(0.0, channel_.rx.mean_us + bias + channel_.rx.jitter_us * z);
}

double Network::link_delay_s(std::uint64_t msg, std::size_t sender, std::size_t receiver, double t) const {
  return tx_delay_s(msg) + propagation_s(sender, receiver, t) + rx_delay_s(msg, receiver);
}

double Network::tx_jitter_s(std::uint64_t msg) const {
  return 1e-6 * channel_.tx.jitter_us * keyed_normal(mix_seed(tx_seed_, msg));
}

double Network::rx_jitter_s(std::uint64_t msg, std::size_t receiver) const {
  const auto id = static_cast<std::uint64_t>(nodes_[receiver].id);
  return 1e-6 * channel_.rx.jitter_us * keyed_normal(mix_seed(rx_seed_, msg, id));
}

void PairRecorder::record(int ref_id, int node_id, double t, double error_s) {
  auto& tr = traces_[{ref_id, node_id}];
  tr.node_a = ref_id;
  tr.node_b = node_id;
  tr.t.push_back(t);
  tr.error_s.push_back(error_s);
}

std::vector<PairTrace> PairRecorder::take() {
  std::vector<PairTrace> out;
  out.reserve(traces_.size());
  for (auto& [key, tr] : traces_) out.push_back(std::move(tr));
  traces_.clear();
  return out;
}

void check_config(const SimConfig& config) {
  if (!(config.duration_s > 0.0)) throw Error(ErrorCode::kConfiguration, "duration must be > 0");
  if (!(config.eval_rate_hz > 0.0)) throw Error(ErrorCode::kConfiguration, "evaluation rate must be > 0");
  if (!(config.sync_period_s > 0.0)) throw Error(ErrorCode::kConfiguration, "sync period must be > 0");
  if (config.sample_phase_s < 0.0 || config.sample_phase_s >= 1.0 / config.eval_rate_hz) {
    throw Error(ErrorCode::kConfiguration, "sample phase must lie inside one evaluation interval");
  }
}

std::vector<double> evaluation_times(const SimConfig& config) {
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / config.eval_rate_hz + config.sample_phase_s;
    if (t >= config.duration_s) break;
    out.push_back(t);
  }
  return out;
}

std::vector<VehicleNode> platoon_nodes(const PlatoonSpec& spec, std::uint64_t seed) {
  if (spec.count < 1) throw Error(ErrorCode::kConfiguration, "platoon needs at least one node");
  std::mt19937_64 rng(derive_seed(seed, "platoon"));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const Vec3 origin = geocentric_to_ecef(deg2rad(spec.lat_deg), deg2rad(spec.lon_deg));
  const Eigen::Matrix3d enu_to_ecef = ecef_to_enu_rotation(origin).transpose();
  const double heading = deg2rad(spec.heading_deg);
  const Vec3 dir(std::sin(heading), std::cos(heading), 0.0);

  std::vector<VehicleNode> nodes;
  for (int k = 0; k < spec.count; ++k) {
    VehicleNode n;
    n.id = k;
    const double speed = spec.speed_mps + spec.speed_spread_mps * unit(rng);
    n.clock.node_id = k;
    n.clock.drift_rate = 1.0 + spec.max_skew * unit(rng);
    n.clock.offset_s = spec.max_offset_s * unit(rng);
    std::vector<TrajectoryPoint> pts;
    for (double t = 0.0;; t += spec.sample_step_s) {
      const double tt = std::min(t, spec.duration_s);
      const Vec3 enu = dir * (-spec.spacing_m * k + speed * tt);
      pts.push_back({tt, origin + enu_to_ecef * enu, wrap_two_pi(heading), 0});
      if (tt >= spec.duration_s) break;
    }
    n.trajectory = Trajectory(std::move(pts));
    nodes.push_back(std::move(n));
  }
  return nodes;
}

}  // namespace vts::protocols
