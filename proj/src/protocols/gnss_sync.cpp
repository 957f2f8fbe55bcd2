#include "vts/protocols/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace vts::protocols {
namespace {

constexpr double kFallbackSendDelay = 1e-4;

std::size_t pulse_count(const SimConfig& config, double rate_hz) {
  return static_cast<std::size_t>(std::ceil(config.duration_s * rate_hz - 1e-9));
}

struct PulsePlan {
  std::vector<double> offsets_ns;
  std::vector<bool> locked;
};

std::vector<PulsePlan> plan_pulses(const std::vector<VehicleNode>& nodes, const SimConfig& config,
                                   const GnssSyncOptions& options) {
  check_config(config);
  if (!(options.pps_rate_hz > 0.0)) throw Error(ErrorCode::kConfiguration, "PPS rate must be > 0");
  const std::size_t n = pulse_count(config, options.pps_rate_hz);
  std::vector<PulsePlan> plans;
  plans.reserve(nodes.size());
  for (const auto& node : nodes) {
    if (!node.pps) {
      throw Error(ErrorCode::kConfiguration,
                  "node " + std::to_string(node.id) + " has no PPS error model");
    }
    PulsePlan p;
    p.offsets_ns = clocks::generate_pps_offsets(*node.pps, n, options.pps_rate_hz);
    p.locked.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / options.pps_rate_hz;
      const bool active = !node.active_until || t < *node.active_until;
      p.locked[k] = active && node.gnss.available(t);
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

clocks::DisciplinedClock build_clock(const VehicleNode& node, const analysis::OffsetSeries& events,
                                     double adjust_limit_s) {
  if (events.empty()) return clocks::DisciplinedClock(node.clock, {}, adjust_limit_s);
  return clocks::discipline_clock(node.clock, events, adjust_limit_s);
}

analysis::OffsetSeries pulse_events(const PulsePlan& plan, double rate_hz) {
  analysis::OffsetSeries s;
  for (std::size_t k = 0; k < plan.offsets_ns.size(); ++k) {
    if (plan.locked[k]) s.samples.push_back({static_cast<double>(k) / rate_hz, plan.offsets_ns[k]});
  }
  return s;
}

}  // namespace

std::vector<clocks::DisciplinedClock> gnss_disciplined_clocks(const std::vector<VehicleNode>& nodes,
                                                              const SimConfig& config,
                                                              const GnssSyncOptions& options) {
  const auto plans = plan_pulses(nodes, config, options);
  std::vector<clocks::DisciplinedClock> out;
  out.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.push_back(build_clock(nodes[i], pulse_events(plans[i], options.pps_rate_hz), options.adjust_limit_s));
  }
  return out;
}

SyncResult run_gnss_sync(const std::vector<VehicleNode>& nodes, const SimConfig& config,
                         const GnssSyncOptions& options) {
  if (nodes.empty()) throw Error(ErrorCode::kConfiguration, "no nodes");
  const auto plans = plan_pulses(nodes, config, options);
  std::vector<clocks::DisciplinedClock> locked;
  locked.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    locked.push_back(build_clock(nodes[i], pulse_events(plans[i], options.pps_rate_hz), options.adjust_limit_s));
  }

  SyncResult result;
  result.protocol = Protocol::kGnss;
  result.warmup_s = config.warmup_s;
  result.rounds = pulse_count(config, options.pps_rate_hz);

  std::vector<clocks::DisciplinedClock> final_clocks = locked;
  if (options.inband_fallback) {
    Network net(nodes, options.fallback_channel);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      analysis::OffsetSeries events;
      bool borrowed = false;
      for (std::size_t k = 0; k < plans[i].offsets_ns.size(); ++k) {
        const double tk = static_cast<double>(k) / options.pps_rate_hz;
        if (plans[i].locked[k]) {
          events.samples.push_back({tk, plans[i].offsets_ns[k]});
          continue;
        }
        if (!net.active(i, tk)) continue;
        const double send = tk + kFallbackSendDelay;
        for (std::size_t j : net.neighbors(i, send)) {
          if (!plans[j].locked[k]) continue;
          const std::uint64_t msg = net.new_message();
          const double err = locked[j].error(send) + net.propagation_s(j, i, send) +
                             net.tx_jitter_s(msg) + net.rx_jitter_s(msg, i);
          events.samples.push_back({send, -err * 1e9});
          borrowed = true;
          break;
        }
      }
      if (borrowed) final_clocks[i] = build_clock(nodes[i], events, options.adjust_limit_s);
    }
    result.message_count = net.messages();
  }

  PairRecorder rec;
  std::vector<bool> ever_synced(nodes.size(), false);
  for (double t : evaluation_times(config)) {
    std::optional<std::size_t> ref;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const bool active = !nodes[i].active_until || t < *nodes[i].active_until;
      if (!active || !final_clocks[i].latest(t)) continue;
      ever_synced[i] = true;
      if (!ref) {
        ref = i;
        continue;
      }
      rec.record(nodes[*ref].id, nodes[i].id, t, final_clocks[i].corrected(t) - final_clocks[*ref].corrected(t));
    }
  }
  result.pairs = rec.take();
  if (!result.pairs.empty()) result.reference_node = result.pairs.front().node_a;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!ever_synced[i]) result.unsynchronized.push_back(nodes[i].id);
  }
  result.summary = summarize_pairs(result.pairs, config.warmup_s);
  if (result.rounds > 0) {
    result.messages_per_node_per_round = static_cast<double>(result.message_count) /
                                         (static_cast<double>(nodes.size()) * static_cast<double>(result.rounds));
  }
  return result;
}

}  // namespace vts::protocols
