#include "vts/protocols/protocols.hpp"

#include <algorithm>
#include <deque>

namespace vts::protocols {
namespace {

constexpr double kLevelSlot = 5e-3;

struct Entry {
  double local;
  double global;
};

struct FtspNode {
  int root_id = 0;
  std::uint64_t seq = 0;  // highest beacon sequence accepted
  double last_heard = 0.0;
  std::deque<Entry> table;
  // global = g0 + b * (local - l0)
  double l0 = 0.0;
  double g0 = 0.0;
  double b = 1.0;
  bool fitted = false;
  // A root keeps the mapping it had when it took over.
  bool is_root = false;

  double global(double local) const {
    if (is_root && !fitted) return local;
    return g0 + b * (local - l0);
  }

  void fit() {
    const double n = static_cast<double>(table.size());
    double ml = 0.0;
    double mg = 0.0;
    for (const auto& e : table) {
      ml += e.local;
      mg += e.global;
    }
    ml /= n;
    mg /= n;
    // Centred sums keep precision with second-scale timestamps.
    double sll = 0.0;
    double slg = 0.0;
    for (const auto& e : table) {
      sll += (e.local - ml) * (e.local - ml);
      slg += (e.local - ml) * (e.global - mg);
    }
    l0 = ml;
    g0 = mg;
    b = sll > 0.0 ? slg / sll : 1.0;
    fitted = true;
  }
};

struct FtspRun {
  SyncResult result;
  std::vector<FtspNode> state;
};

FtspRun simulate(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, double duration_s,
                 double beacon_period_s, const SimConfig& config, const FtspOptions& options) {
  SimConfig cfg = config;
  cfg.duration_s = duration_s;
  cfg.sync_period_s = beacon_period_s;
  check_config(cfg);
  if (options.regression_window < 2 || options.min_entries < 1 ||
      options.min_entries > options.regression_window) {
    throw Error(ErrorCode::kConfiguration, "FTSP needs window >= 2 and 1 <= min_entries <= window");
  }
  if (options.root_timeout_periods < 1) throw Error(ErrorCode::kConfiguration, "root timeout must be >= 1");

  Network net(nodes, channel);
  const std::size_t n = nodes.size();
  std::vector<clocks::QuartzClock> hw;
  for (const auto& node : nodes) hw.push_back(node.clock);
  auto local = [&](std::size_t i, double t) { return clocks::read_clock(hw[i], t); };

  std::vector<FtspNode> st(n);
  std::size_t first_root = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (net.id(i) < net.id(first_root)) first_root = i;
  }
  for (std::size_t i = 0; i < n; ++i) st[i].root_id = net.id(first_root);
  st[first_root].is_root = true;

  FtspRun run;
  SyncResult& result = run.result;
  result.protocol = Protocol::kFtsp;
  result.warmup_s = cfg.warmup_s;
  result.reference_node = net.id(first_root);

  auto synced = [&](std::size_t i) { return st[i].is_root || st[i].table.size() >= options.min_entries; };

  EventQueue q;
  PairRecorder rec;
  std::uint64_t root_seq = 0;
  const double timeout = options.root_timeout_periods * beacon_period_s;
  std::size_t periods = 0;

  for (double start = 0.25 * beacon_period_s; start < duration_s; start += beacon_period_s) {
    ++periods;
    q.schedule(start, -1, [&, start](double) {
      ++root_seq;
      for (std::size_t i = 0; i < n; ++i) {
        if (!net.active(i, start) || st[i].is_root) continue;
        if (start - st[i].last_heard > timeout) {
          // Root lost: claim the role; lower claims win below.
          if (st[i].table.size() >= options.min_entries) st[i].fit();
          st[i].is_root = true;
          st[i].root_id = net.id(i);
          st[i].table.clear();
        }
      }
      std::vector<std::size_t> senders;
      for (std::size_t i = 0; i < n; ++i) {
        if (net.active(i, start) && st[i].is_root) senders.push_back(i);
      }
      std::vector<bool> sent(n, false);
      std::deque<std::pair<std::size_t, int>> flood;
      for (std::size_t s : senders) flood.push_back({s, 0});
      while (!flood.empty()) {
        const auto [s, level] = flood.front();
        flood.pop_front();
        if (sent[s] || !net.active(s, start)) continue;
        sent[s] = true;
        const double t = start + kLevelSlot * level;
        const std::uint64_t msg = net.new_message();
        // MAC stamps: only residual jitter separates the two timestamps.
        const double g = st[s].global(local(s, t)) + net.tx_jitter_s(msg);
        const int beacon_root = st[s].root_id;
        for (std::size_t r : net.neighbors(s, t)) {
          FtspNode& node = st[r];
          const double arrive = t + net.propagation_s(s, r, t);
          if (beacon_root < node.root_id) {
            node.root_id = beacon_root;
            node.is_root = false;
            node.table.clear();
            node.fitted = false;
            node.seq = 0;
          }
          if (beacon_root != node.root_id || node.is_root || root_seq <= node.seq) continue;
          node.seq = root_seq;
          node.last_heard = start;
          node.table.push_back({local(r, arrive) + net.rx_jitter_s(msg, r), g});
          while (node.table.size() > options.regression_window) node.table.pop_front();
          if (node.table.size() >= options.min_entries) {
            node.fit();
            flood.push_back({r, level + 1});
          }
        }
      }
    });
  }

  for (double t : evaluation_times(cfg)) {
    q.schedule(t, -2, [&, t](double) {
      std::optional<std::size_t> ref;
      for (std::size_t i = 0; i < n; ++i) {
        if (!net.active(i, t) || !st[i].is_root) continue;
        if (!ref || net.id(i) < net.id(*ref)) ref = i;
      }
      if (!ref) return;
      const double g_ref = st[*ref].global(local(*ref, t));
      for (std::size_t i = 0; i < n; ++i) {
        if (i == *ref || !net.active(i, t) || st[i].is_root || !synced(i)) continue;
        if (st[i].root_id != net.id(*ref)) continue;
        rec.record(net.id(*ref), net.id(i), t, st[i].global(local(i, t)) - g_ref);
      }
    });
  }
  q.run_until(duration_s);

  result.pairs = rec.take();
  result.summary = summarize_pairs(result.pairs, cfg.warmup_s);
  result.rounds = periods;
  result.message_count = net.messages();
  if (periods > 0) {
    result.messages_per_node_per_round =
        static_cast<double>(result.message_count) / (static_cast<double>(n) * static_cast<double>(periods));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!synced(i)) result.unsynchronized.push_back(net.id(i));
  }
  run.state = std::move(st);
  return run;
}

}  // namespace

SyncResult run_ftsp(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, double duration_s,
                    double beacon_period_s, const SimConfig& config, const FtspOptions& options) {
  return simulate(nodes, channel, duration_s, beacon_period_s, config, options).result;
}

std::vector<FtspSkewEstimate> ftsp_final_skews(const std::vector<VehicleNode>& nodes,
                                               const ChannelModel& channel, double duration_s,
                                               double beacon_period_s, const SimConfig& config,
                                               const FtspOptions& options) {
  const auto run = simulate(nodes, channel, duration_s, beacon_period_s, config, options);
  std::vector<FtspSkewEstimate> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.push_back({nodes[i].id, run.state[i].is_root && !run.state[i].fitted ? 1.0 : run.state[i].b});
  }
  return out;
}

}  // namespace vts::protocols
