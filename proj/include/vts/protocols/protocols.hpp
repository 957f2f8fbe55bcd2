#pragma once

#include "vts/protocols/network.hpp"

#include <optional>
#include <vector>

namespace vts::protocols {

struct GnssSyncOptions {
  double pps_rate_hz = 1.0;
  double adjust_limit_s = 0.1;
  /// During an outage, take time from a GNSS-locked neighbour with one
  /// MAC-stamped beacon per pulse interval.
  bool inband_fallback = false;
  ChannelModel fallback_channel = calibrated_channel(Protocol::kFtsp);
};

/// Out-of-band synchronization: every node disciplines its clock to its own
/// receiver's PPS; pairs are (lowest id, other). No channel messages unless
/// the fallback is used.
SyncResult run_gnss_sync(const std::vector<VehicleNode>& nodes, const SimConfig& config,
                         const GnssSyncOptions& options = {});

/// Per-node disciplined clocks as used by run_gnss_sync (no fallback).
std::vector<clocks::DisciplinedClock> gnss_disciplined_clocks(const std::vector<VehicleNode>& nodes,
                                                              const SimConfig& config,
                                                              const GnssSyncOptions& options = {});

struct TpsnOptions {
  double exchange_slot_s = 2e-3;
  double turnaround_s = 2e-4;
};

/// Level discovery from the root, then a two-way exchange per child/parent
/// pair in level order each round. Duration is rounds * sync period.
SyncResult run_tpsn(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, int root_id,
                    std::size_t rounds, const SimConfig& config, const TpsnOptions& options = {});

struct RbsOptions {
  std::optional<int> beacon_node;  // default: best-connected node at t = 0
  int beacons_per_estimate = 2;
  double beacon_spacing_s = 5e-3;
};

/// Reference broadcasts: receivers compare arrival stamps of the same beacon
/// and align to the lowest-id receiver. Throws kInsufficientReceivers when
/// fewer than two receivers hear the beacon node.
SyncResult run_rbs(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, std::size_t rounds,
                   const SimConfig& config, const RbsOptions& options = {});

struct FtspOptions {
  std::size_t regression_window = 8;
  std::size_t min_entries = 2;
  int root_timeout_periods = 3;
};

/// Flooding with MAC-layer timestamps; every node fits global = a + b * local
/// over its last `regression_window` (local, global) pairs. The lowest id
/// node is root; when it is lost, the survivors re-elect by the same rule.
SyncResult run_ftsp(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, double duration_s,
                    double beacon_period_s, const SimConfig& config, const FtspOptions& options = {});

/// Slope estimates of each node's regression at the end of a FTSP run.
struct FtspSkewEstimate {
  int node_id;
  double skew;  // d global / d local
};
std::vector<FtspSkewEstimate> ftsp_final_skews(const std::vector<VehicleNode>& nodes,
                                               const ChannelModel& channel, double duration_s,
                                               double beacon_period_s, const SimConfig& config,
                                               const FtspOptions& options = {});

struct CtsOptions {
  /// Initially synchronized groups (node ids). Nodes not listed start alone.
  std::vector<std::vector<int>> initial_groups;
  /// Members not heard for this many periods are dropped from the size count.
  int membership_periods = 2;
};

struct CtsGroupSnapshot {
  double t = 0.0;
  std::map<int, int> group_of;  // node id -> group id
};

/// Nodes beacon (group id, group size, time); a node adopts the time of a
/// larger group (ties to the lower group id) and otherwise follows its group
/// leader.
SyncResult run_cts(const std::vector<VehicleNode>& nodes, const ChannelModel& channel, double duration_s,
                   const SimConfig& config, const CtsOptions& options = {},
                   std::vector<CtsGroupSnapshot>* snapshots = nullptr);

struct CompareSpec {
  std::vector<VehicleNode> nodes;
  SimConfig config;
  std::vector<Protocol> protocols;
  /// Channel per in-band protocol; missing entries use calibrated_channel
  /// seeded from derive_seed(seed, "channel.<name>").
  std::map<Protocol, ChannelModel> channels;
  std::uint64_t seed = 0;
  GnssSyncOptions gnss;
  TpsnOptions tpsn;
  std::optional<int> tpsn_root;  // default: lowest id
  RbsOptions rbs;
  FtspOptions ftsp;
  double ftsp_beacon_period_s = 1.0;
  CtsOptions cts;
};

struct ComparisonReport {
  std::vector<SyncResult> results;  // in the order requested
  std::vector<std::size_t> ranking;  // indices into results, ascending RMS
  /// best in-band RMS / GNSS RMS when both were run.
  std::optional<double> separation_ratio;
};

/// Runs every requested protocol on the same node and clock realization.
ComparisonReport compare_protocols(const CompareSpec& spec);

}  // namespace vts::protocols
