#include "vts/protocols/protocols.hpp"

#include <algorithm>
#include <set>

namespace vts::protocols {
namespace {

constexpr double kBeaconSlot = 2e-3;

struct CtsNode {
  int group = 0;
  std::map<int, double> heard;  // member id -> last time heard in my group
};

}  // namespace

SyncResult run_cts(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, double duration_s,
                   const SimConfig& config, const CtsOptions& options,
                   std::vector<CtsGroupSnapshot>* snapshots) {
  SimConfig cfg = config;
  cfg.duration_s = duration_s;
  check_config(cfg);
  if (options.membership_periods < 1) throw Error(ErrorCode::kConfiguration, "membership_periods must be >= 1");

  Network net(nodes, channel);
  const std::size_t n = nodes.size();
  const double period = cfg.sync_period_s;
  const double keep = options.membership_periods * period;

  std::vector<CorrectedClock> clk;
  for (const auto& node : nodes) clk.push_back(CorrectedClock{node.clock});
  std::vector<CtsNode> st(n);
  for (std::size_t i = 0; i < n; ++i) {
    st[i].group = net.id(i);
    st[i].heard[net.id(i)] = 0.0;
  }
  std::set<int> seen;
  for (const auto& g : options.initial_groups) {
    if (g.empty()) continue;
    const int leader = *std::min_element(g.begin(), g.end());
    const std::size_t li = net.index_of(leader);
    for (int id : g) {
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kConfiguration, "node " + std::to_string(id) + " is in two initial groups");
      }
      const std::size_t i = net.index_of(id);
      st[i].group = leader;
      st[i].heard.clear();
      for (int m : g) st[i].heard[m] = 0.0;
      // Start exactly on the leader's time.
      clk[i].offset = clk[li].read(0.0) - clk[i].local(0.0);
    }
  }

  auto group_size = [&](std::size_t i, double t) {
    int count = 0;
    for (const auto& [id, when] : st[i].heard) {
      if (id == net.id(i) || t - when <= keep) ++count;
    }
    return count;
  };

  SyncResult result;
  result.protocol = Protocol::kCts;
  result.warmup_s = cfg.warmup_s;

  EventQueue q;
  std::size_t periods = 0;
  for (double start = 0.5 * period; start < duration_s; start += period) {
    ++periods;
    q.schedule(start, -1, [&, start](double) {
      std::vector<std::size_t> order;
      for (std::size_t i = 0; i < n; ++i) {
        if (net.active(i, start)) order.push_back(i);
      }
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return net.id(a) < net.id(b); });
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t s = order[k];
        const double t = start + kBeaconSlot * static_cast<double>(k);
        const std::uint64_t msg = net.new_message();
        const int g = st[s].group;
        const int size = group_size(s, t);
        // The stamp is taken before the send path; receivers add the mean delay.
        const double stamp = clk[s].read(t);
        for (std::size_t r : net.neighbors(s, t)) {
          const double arrive = t + net.link_delay_s(msg, s, r, t);
          CtsNode& node = st[r];
          const int my_size = group_size(r, arrive);
          const bool larger = size > my_size || (size == my_size && g < node.group);
          const double correction = stamp + net.mean_delay_s() - clk[r].read(arrive);
          if (g != node.group && larger) {
            clk[r].offset += correction;
            clk[r].synced = true;
            node.group = g;
            node.heard.clear();
            node.heard[net.id(r)] = arrive;
            node.heard[net.id(s)] = arrive;
          } else if (g == node.group) {
            node.heard[net.id(s)] = arrive;
            if (net.id(s) == g) {
              clk[r].offset += correction;
              clk[r].synced = true;
            }
          }
        }
      }
      if (snapshots) {
        CtsGroupSnapshot snap;
        snap.t = start + kBeaconSlot * static_cast<double>(order.size());
        for (std::size_t i = 0; i < n; ++i) snap.group_of[net.id(i)] = st[i].group;
        snapshots->push_back(std::move(snap));
      }
    });
  }

  PairRecorder rec;
  std::vector<bool> in_largest(n, false);
  for (double t : evaluation_times(cfg)) {
    q.schedule(t, -2, [&, t](double) {
      std::map<int, int> count;
      for (std::size_t i = 0; i < n; ++i) {
        if (net.active(i, t)) ++count[st[i].group];
      }
      int best = -1;
      int best_count = 0;
      for (const auto& [g, c] : count) {
        if (c > best_count) {
          best = g;
          best_count = c;
        }
      }
      if (best_count < 2) return;
      std::optional<std::size_t> ref;
      for (std::size_t i = 0; i < n; ++i) {
        if (net.active(i, t) && st[i].group == best && (!ref || net.id(i) < net.id(*ref))) ref = i;
      }
      in_largest.assign(n, false);
      in_largest[*ref] = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == *ref || !net.active(i, t) || st[i].group != best) continue;
        in_largest[i] = true;
        rec.record(net.id(*ref), net.id(i), t, clk[i].read(t) - clk[*ref].read(t));
      }
    });
  }
  q.run_until(duration_s);

  result.pairs = rec.take();
  result.summary = summarize_pairs(result.pairs, cfg.warmup_s);
  if (!result.pairs.empty()) result.reference_node = result.pairs.back().node_a;
  result.rounds = periods;
  result.message_count = net.messages();
  if (periods > 0) {
    result.messages_per_node_per_round =
        static_cast<double>(result.message_count) / (static_cast<double>(n) * static_cast<double>(periods));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_largest[i]) result.unsynchronized.push_back(net.id(i));
  }
  return result;
}

}  // namespace vts::protocols
