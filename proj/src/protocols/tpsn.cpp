#include "vts/protocols/protocols.hpp"

#include <algorithm>
#include <deque>
#include <memory>

namespace vts::protocols {

SyncResult run_tpsn(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, int root_id,
                    std::size_t rounds, const SimConfig& config, const TpsnOptions& options) {
  SimConfig cfg = config;
  cfg.duration_s = static_cast<double>(rounds) * config.sync_period_s;
  check_config(cfg);

  // Shared so the scheduled closures stay valid however the queue moves them.
  auto net = std::make_shared<Network>(nodes, channel);
  const std::size_t root = net->index_of(root_id);
  auto clk = std::make_shared<std::vector<CorrectedClock>>();
  for (const auto& n : nodes) clk->push_back(CorrectedClock{n.clock});
  (*clk)[root].synced = true;

  SyncResult result;
  result.protocol = Protocol::kTpsn;
  result.reference_node = root_id;
  result.warmup_s = cfg.warmup_s;
  result.rounds = rounds;

  EventQueue q;
  std::vector<int> level(nodes.size(), -1);

  auto exchange = [net, clk, &q, &options](std::size_t child, std::size_t parent, double t1) {
    const double T1 = (*clk)[child].read(t1);
    const std::uint64_t up = net->new_message();
    const double t2 = t1 + net->link_delay_s(up, child, parent, t1);
    q.schedule(t2, net->id(parent), [=, &q, &options](double) {
      const double T2 = (*clk)[parent].read(t2);
      const double t3 = t2 + options.turnaround_s;
      const double T3 = (*clk)[parent].read(t3);
      const std::uint64_t down = net->new_message();
      const double t4 = t3 + net->link_delay_s(down, parent, child, t3);
      q.schedule(t4, net->id(child), [=](double) {
        const double T4 = (*clk)[child].read(t4);
        auto& c = (*clk)[child];
        c.offset += ((T2 - T1) - (T4 - T3)) / 2.0;
        c.synced = true;
      });
    });
  };

  for (std::size_t r = 0; r < rounds; ++r) {
    const double start = static_cast<double>(r) * cfg.sync_period_s;
    q.schedule(start, -1, [&, start](double) {
      // Level discovery: one broadcast per reached node.
      std::vector<int> lvl(nodes.size(), -1);
      std::vector<std::size_t> parent(nodes.size(), 0);
      std::vector<std::size_t> order;
      std::deque<std::size_t> frontier;
      if (net->active(root, start)) {
        lvl[root] = 0;
        frontier.push_back(root);
      }
      while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop_front();
        net->new_message();
        for (std::size_t v : net->neighbors(u, start)) {
          if (lvl[v] >= 0) continue;
          lvl[v] = lvl[u] + 1;
          parent[v] = u;
          order.push_back(v);
          frontier.push_back(v);
        }
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (lvl[a] != lvl[b]) return lvl[a] < lvl[b];
        return net->id(a) < net->id(b);
      });
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t child = order[k];
        const double t1 = start + options.exchange_slot_s * static_cast<double>(k + 1);
        const std::size_t up = parent[child];
        q.schedule(t1, net->id(child), [&exchange, child, up, t1](double) { exchange(child, up, t1); });
      }
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (lvl[i] >= 0) level[i] = lvl[i];
      }
    });
  }

  PairRecorder rec;
  for (double t : evaluation_times(cfg)) {
    q.schedule(t, -2, [&, t](double) {
      if (!net->active(root, t)) return;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == root || !(*clk)[i].synced || !net->active(i, t)) continue;
        rec.record(root_id, net->id(i), t, (*clk)[i].read(t) - (*clk)[root].read(t));
      }
    });
  }
  q.run_until(cfg.duration_s);

  result.pairs = rec.take();
  result.summary = summarize_pairs(result.pairs, cfg.warmup_s);
  result.message_count = net->messages();
  if (rounds > 0) {
    result.messages_per_node_per_round =
        static_cast<double>(result.message_count) / (static_cast<double>(nodes.size()) * static_cast<double>(rounds));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(*clk)[i].synced) result.unsynchronized.push_back(net->id(i));
    if (level[i] >= 0) result.hop_count[net->id(i)] = level[i];
  }
  return result;
}

}  // namespace vts::protocols
