#pragma once

#include "vts/analysis.hpp"
#include "vts/clocks.hpp"
#include "vts/constellation.hpp"
#include "vts/estimation.hpp"
#include "vts/protocols/protocols.hpp"
#include "vts/trajectory.hpp"
#include "vts/visibility.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vts::scenario {

struct Issue {
  std::string path;  // e.g. "sync.protocols[2]"
  std::string message;
};

/// Thrown by load/run on invalid input; carries every issue found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

struct ProfileSpec {
  std::string name;
  double wall_deg = 10.0;
  double corridor_half_width_deg = 0.0;
  double along_deg = 10.0;
};

struct MaskSpec {
  std::string type = "open-sky";  // open-sky | canyon
  double base_cutoff_deg = 10.0;
  std::vector<ProfileSpec> profiles;
};

struct SegmentSpec {
  double heading_deg = 0.0;
  double duration_s = 0.0;
  double speed_mps = 0.0;
  std::string profile;  // name in mask.profiles; empty = first
};

struct ReceiverSpec {
  std::string type = "static";  // static | street-drive | csv
  double lat_deg = -27.4698;
  double lon_deg = 153.0251;
  double height_m = 0.0;
  double sample_step_s = 1.0;
  /// street-drive: the list is repeated until duration_s is covered.
  std::vector<SegmentSpec> segments;
  std::string file;  // csv
};

struct PvtSpec {
  bool enabled = false;
  double sigma_pseudorange_m = 5.0;
  double sigma_doppler_mps = 0.05;
  double clock_bias_s = 1e-4;
  double clock_drift = 1e-8;
};

struct ChannelSpec {
  std::optional<double> range_m;
  std::optional<double> tx_mean_us;
  std::optional<double> tx_jitter_us;
  std::optional<double> rx_mean_us;
  std::optional<double> rx_jitter_us;
};

struct OutageSpec {
  int node = 0;
  double from_s = 0.0;
  double to_s = 0.0;
};

struct SyncSpec {
  bool enabled = false;
  int nodes = 10;
  double spacing_m = 30.0;
  double speed_mps = 25.0;
  double heading_deg = 0.0;
  double max_skew = 1e-7;
  double max_offset_s = 1e-3;
  std::string pps_preset = "same-model";
  double duration_s = 600.0;
  double warmup_s = 60.0;
  double eval_rate_hz = 1.0;
  double sync_period_s = 1.0;
  double ftsp_beacon_period_s = 1.0;
  bool inband_fallback = false;
  std::vector<std::string> protocols;
  std::map<std::string, ChannelSpec> channels;
  std::vector<OutageSpec> outages;
};

struct PpsBenchSpec {
  bool enabled = false;
  double hours = 24.0;
  std::vector<std::string> presets;
  double window_s = 7200.0;
};

struct Scenario {
  std::string name;
  std::optional<std::uint64_t> seed;
  double duration_s = 3600.0;
  double epoch_step_s = 10.0;
  double gdop_threshold = 6.0;
  std::vector<std::string> constellations{"GPS"};
  std::string constellation_file;  // empty = nominal constellation
  MaskSpec mask;
  ReceiverSpec receiver;
  PvtSpec pvt;
  SyncSpec sync;
  PpsBenchSpec pps_bench;
  bool availability = true;
  /// Relative paths resolve against this directory.
  std::filesystem::path base_dir;
  /// Shape problems found while reading the file.
  std::vector<Issue> parse_issues;
};

/// Reads the YAML text. Malformed YAML throws kParse; wrong value types are
/// collected in parse_issues.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
/// Throws kIo if the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

/// Every problem with its field path; empty means runnable.
std::vector<Issue> validate(const Scenario& s);

/// Built inputs, after validation.
std::vector<constellation::OrbitElements> build_constellation(const Scenario& s);
Trajectory build_trajectory(const Scenario& s);
visibility::MaskModel build_mask(const Scenario& s);
std::vector<protocols::VehicleNode> build_nodes(const Scenario& s);

struct PvtRecord {
  double t = 0.0;
  bool valid = false;
  int nsat = 0;
  double gdop = 0.0;
  double tdop = 0.0;
  double bias_ns = 0.0;
  double pos_err_m = 0.0;
};

struct PvtRun {
  std::string constellation;
  std::vector<PvtRecord> records;
};

struct PpsBenchResult {
  std::string preset;
  analysis::OffsetSeries series;
  analysis::OffsetStats stats;
  analysis::OffsetSeries window_means;
};

struct RunArtifacts {
  std::vector<visibility::AvailabilityResult> availability;
  std::vector<PvtRun> pvt;
  std::optional<protocols::ComparisonReport> sync;
  std::vector<PpsBenchResult> pps;
};

enum class Stage { kAvailability, kPvt, kSync, kPps };

/// Runs the requested stages (all enabled ones when `stages` is empty) in a
/// fixed order. Throws ValidationError before doing any work.
RunArtifacts run(const Scenario& s, const std::vector<Stage>& stages = {});

/// Seed of one component: derive_seed(scenario seed, component).
std::uint64_t component_seed(const Scenario& s, std::string_view component);

}  // namespace vts::scenario
