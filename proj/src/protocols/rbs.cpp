#include "vts/protocols/protocols.hpp"

#include <algorithm>
#include <memory>

namespace vts::protocols {
namespace {

std::size_t best_connected(const Network& net) {
  std::size_t best = 0;
  std::size_t best_deg = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const std::size_t deg = net.neighbors(i, 0.0).size();
    if (deg > best_deg || (deg == best_deg && net.id(i) < net.id(best))) {
      best = i;
      best_deg = deg;
    }
  }
  return best;
}

}  // namespace

SyncResult run_rbs(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, std::size_t rounds,
                   const SimConfig& config, const RbsOptions& options) {
  SimConfig cfg = config;
  cfg.duration_s = static_cast<double>(rounds) * config.sync_period_s;
  check_config(cfg);
  if (options.beacons_per_estimate < 1) {
    throw Error(ErrorCode::kConfiguration, "beacons_per_estimate must be >= 1");
  }

  Network net(nodes, channel);
  const std::size_t sender = options.beacon_node ? net.index_of(*options.beacon_node) : best_connected(net);
  if (net.neighbors(sender, 0.0).size() < 2) {
    throw Error(ErrorCode::kInsufficientReceivers,
                "beacon node " + std::to_string(net.id(sender)) + " reaches fewer than 2 receivers");
  }

  std::vector<CorrectedClock> clk;
  for (const auto& n : nodes) clk.push_back(CorrectedClock{n.clock});

  SyncResult result;
  result.protocol = Protocol::kRbs;
  result.warmup_s = cfg.warmup_s;
  result.rounds = rounds;

  EventQueue q;
  // Beacons go out mid-interval so estimates never straddle an evaluation.
  const double lead = 0.5 * cfg.sync_period_s;
  std::optional<std::size_t> ref;

  for (std::size_t r = 0; r < rounds; ++r) {
    const double start = static_cast<double>(r) * cfg.sync_period_s + lead;
    q.schedule(start, -1, [&, start](double) {
      const auto receivers = net.neighbors(sender, start);
      if (receivers.size() < 2) return;
      // arrivals[k][j]: corrected reading of receiver j when beacon k lands.
      std::vector<std::vector<double>> stamps(receivers.size());
      for (int b = 0; b < options.beacons_per_estimate; ++b) {
        const double tb = start + options.beacon_spacing_s * b;
        const std::uint64_t msg = net.new_message();
        const double tx = net.tx_delay_s(msg);
        for (std::size_t j = 0; j < receivers.size(); ++j) {
          const std::size_t rcv = receivers[j];
          const double arrival = tb + tx + net.propagation_s(sender, rcv, tb) + net.rx_delay_s(msg, rcv);
          stamps[j].push_back(clk[rcv].read(arrival));
        }
      }
      // Every receiver shares its reception stamps once.
      for (std::size_t j = 0; j < receivers.size(); ++j) net.new_message();

      const std::size_t r0 = *std::min_element(receivers.begin(), receivers.end(),
                                               [&](std::size_t a, std::size_t b) { return net.id(a) < net.id(b); });
      const std::size_t j0 = static_cast<std::size_t>(std::find(receivers.begin(), receivers.end(), r0) -
                                                      receivers.begin());
      if (!ref) ref = r0;
      clk[r0].synced = true;
      if (r0 != *ref) return;
      for (std::size_t j = 0; j < receivers.size(); ++j) {
        if (j == j0) continue;
        double sum = 0.0;
        for (std::size_t b = 0; b < stamps[j].size(); ++b) sum += stamps[j0][b] - stamps[j][b];
        clk[receivers[j]].offset += sum / static_cast<double>(stamps[j].size());
        clk[receivers[j]].synced = true;
      }
    });
  }

  PairRecorder rec;
  for (double t : evaluation_times(cfg)) {
    q.schedule(t, -2, [&, t](double) {
      if (!ref || !net.active(*ref, t)) return;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == *ref || i == sender || !clk[i].synced || !net.active(i, t)) continue;
        rec.record(net.id(*ref), net.id(i), t, clk[i].read(t) - clk[*ref].read(t));
      }
    });
  }
  q.run_until(cfg.duration_s);

  result.pairs = rec.take();
  result.summary = summarize_pairs(result.pairs, cfg.warmup_s);
  if (ref) result.reference_node = net.id(*ref);
  result.message_count = net.messages();
  if (rounds > 0) {
    result.messages_per_node_per_round =
        static_cast<double>(result.message_count) / (static_cast<double>(nodes.size()) * static_cast<double>(rounds));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == sender || !clk[i].synced) result.unsynchronized.push_back(net.id(i));
  }
  return result;
}

}  // namespace vts::protocols
