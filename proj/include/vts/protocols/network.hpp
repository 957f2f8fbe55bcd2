#pragma once

#include "vts/clocks.hpp"
#include "vts/common.hpp"
#include "vts/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vts::protocols {

enum class Protocol { kGnss, kTpsn, kRbs, kFtsp, kCts };

std::string_view to_string(Protocol p);
/// Throws kConfiguration listing the known names.
Protocol parse_protocol(std::string_view name);
std::vector<std::string> known_protocols();

/// Processing delay: max(0, mean + jitter * N(0, 1)) microseconds.
struct DelayModel {
  double mean_us = 0.0;
  double jitter_us = 0.0;
};

struct ChannelModel {
  double comm_range_m = 1000.0;
  DelayModel tx;
  DelayModel rx;
  /// Fixed extra receive delay per node id (models asymmetric hardware).
  std::map<int, double> node_rx_bias_us;
  std::uint64_t seed = 0;
};

/// Channel whose jitter puts each in-band protocol near its published
/// single-hop accuracy (TPSN ~20 us, RBS ~6 us, FTSP ~1.5 us, CTS ~11 us).
ChannelModel calibrated_channel(Protocol p, std::uint64_t seed = 0);

/// Step function of GNSS timing availability.
class AvailabilityTrace {
 public:
  static AvailabilityTrace always() { return AvailabilityTrace({{0.0, true}}); }
  /// Change points (t, available) sorted by time; before the first point the
  /// first state holds.
  explicit AvailabilityTrace(std::vector<std::pair<double, bool>> changes);
  bool available(double t) const;
  const std::vector<std::pair<double, bool>>& changes() const { return changes_; }

 private:
  std::vector<std::pair<double, bool>> changes_;
};

struct VehicleNode {
  int id = 0;
  Trajectory trajectory;
  clocks::QuartzClock clock;
  std::optional<clocks::PpsErrorModel> pps;
  AvailabilityTrace gnss = AvailabilityTrace::always();
  /// The node leaves the network (powers off) at this time.
  std::optional<double> active_until;
};

struct SimConfig {
  double duration_s = 600.0;
  double eval_rate_hz = 1.0;
  /// Evaluation instants are k / eval_rate_hz + sample_phase_s.
  double sample_phase_s = 1e-3;
  double warmup_s = 60.0;
  double sync_period_s = 1.0;
};

struct PairTrace {
  int node_a = 0;
  int node_b = 0;
  std::vector<double> t;
  std::vector<double> error_s;  // clock_b - clock_a
};

/// Statistics of |pairwise error| over steady-state samples (t >= warmup).
struct SyncSummary {
  double mean_abs_s = 0.0;
  double std_abs_s = 0.0;
  double rms_s = 0.0;
  double peak_s = 0.0;
  std::size_t n = 0;
};

struct SyncResult {
  Protocol protocol = Protocol::kGnss;
  int reference_node = 0;
  std::vector<PairTrace> pairs;
  SyncSummary summary;
  double warmup_s = 0.0;
  std::size_t message_count = 0;
  std::size_t rounds = 0;
  double messages_per_node_per_round = 0.0;
  std::vector<int> unsynchronized;
  /// Last known hop distance from the time source (tree protocols).
  std::map<int, int> hop_count;
};

SyncSummary summarize_pairs(const std::vector<PairTrace>& pairs, double warmup_s);

/// Discrete-event queue ordered by (time, node id, insertion sequence).
class EventQueue {
 public:
  using Action = std::function<void(double)>;

  void schedule(double t, int node_id, Action action);
  bool empty() const { return queue_.empty(); }
  /// Runs events with time < t_end in order.
  void run_until(double t_end);

 private:
  struct Event {
    double t;
    int node_id;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.t != b.t) return a.t > b.t;
      if (a.node_id != b.node_id) return a.node_id > b.node_id;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
};

/// Node clock plus a software correction:
/// reading = local + offset + skew * (local - anchor), local = hardware C(t).
struct CorrectedClock {
  clocks::QuartzClock hw;
  double offset = 0.0;
  double skew = 0.0;
  double anchor = 0.0;
  bool synced = false;

  double local(double t) const { return clocks::read_clock(hw, t); }
  double read(double t) const {
    const double l = local(t);
    return l + offset + skew * (l - anchor);
  }
};

/// Topology, delays and message accounting shared by the in-band protocols.
class Network {
 public:
  Network(const std::vector<VehicleNode>& nodes, ChannelModel channel);

  std::size_t size() const { return nodes_.size(); }
  const VehicleNode& node(std::size_t i) const { return nodes_[i]; }
  int id(std::size_t i) const { return nodes_[i].id; }
  /// Index of the node with this id; throws kConfiguration if absent.
  std::size_t index_of(int node_id) const;

  bool active(std::size_t i, double t) const;
  Vec3 position(std::size_t i, double t) const;
  bool in_range(std::size_t a, std::size_t b, double t) const;
  std::vector<std::size_t> neighbors(std::size_t i, double t) const;
  double propagation_s(std::size_t a, std::size_t b, double t) const;

  std::uint64_t new_message() { return ++messages_; }
  std::size_t messages() const { return messages_; }

  double tx_delay_s(std::uint64_t msg) const;
  double rx_delay_s(std::uint64_t msg, std::size_t receiver) const;
  /// tx + propagation + rx for one reception of `msg`.
  double link_delay_s(std::uint64_t msg, std::size_t sender, std::size_t receiver, double t) const;
  /// Zero-mean jitter draws for MAC-layer timestamps.
  double tx_jitter_s(std::uint64_t msg) const;
  double rx_jitter_s(std::uint64_t msg, std::size_t receiver) const;
  double mean_delay_s() const { return 1e-6 * (channel_.tx.mean_us + channel_.rx.mean_us); }

  const ChannelModel& channel() const { return channel_; }

 private:
  std::vector<VehicleNode> nodes_;
  ChannelModel channel_;
  std::uint64_t tx_seed_;
  std::uint64_t rx_seed_;
  std::size_t messages_ = 0;
};

/// Collects (reference, node) errors at evaluation instants.
class PairRecorder {
 public:
  void record(int ref_id, int node_id, double t, double error_s);
  std::vector<PairTrace> take();

 private:
  std::map<std::pair<int, int>, PairTrace> traces_;
};

/// Evaluation instants in [0, duration).
std::vector<double> evaluation_times(const SimConfig& config);

void check_config(const SimConfig& config);

/// Vehicles in a column along `heading_deg` from (lat, lon): node k starts
/// k * spacing_m behind the head and drives at speed_mps plus a small
/// per-node spread. Clocks get skews uniform in +-max_skew and offsets
/// uniform in +-max_offset_s.
struct PlatoonSpec {
  int count = 10;
  double lat_deg = -27.4698;
  double lon_deg = 153.0251;
  double heading_deg = 0.0;
  double spacing_m = 30.0;
  double speed_mps = 25.0;
  double speed_spread_mps = 0.2;
  double max_skew = 1e-7;
  double max_offset_s = 1e-3;
  double duration_s = 600.0;
  double sample_step_s = 1.0;
};

std::vector<VehicleNode> platoon_nodes(const PlatoonSpec& spec, std::uint64_t seed);

}  // namespace vts::protocols
