#include "vts/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace vts::scenario {
namespace {

std::string join_issues(const std::vector<Issue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "; ";
    out += i.path + ": " + i.message;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::vector<Issue>& issues) : issues_(issues) {}

  template <typename T>
  void get(const YAML::Node& node, const std::string& key, const std::string& path, T& out,
           const char* what) {
    const YAML::Node v = node[key];
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      issues_.push_back({path + key, std::string("expected ") + what});
    }
  }

  template <typename T>
  void get(const YAML::Node& node, const std::string& key, const std::string& path, std::optional<T>& out,
           const char* what) {
    const YAML::Node v = node[key];
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      issues_.push_back({path + key, std::string("expected ") + what});
    }
  }

  void strings(const YAML::Node& node, const std::string& key, const std::string& path,
               std::vector<std::string>& out) {
    const YAML::Node v = node[key];
    if (!v) return;
    if (!v.IsSequence()) {
      issues_.push_back({path + key, "expected a list of names"});
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        out.push_back(v[i].as<std::string>());
      } catch (const YAML::Exception&) {
        issues_.push_back({path + key + "[" + std::to_string(i) + "]", "expected a name"});
      }
    }
  }

  bool section(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> known) {
    if (!node.IsMap()) {
      issues_.push_back({path.empty() ? "<root>" : path.substr(0, path.size() - 1), "expected a mapping"});
      return false;
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
        issues_.push_back({path + key, "unknown field"});
      }
    }
    return true;
  }

 private:
  std::vector<Issue>& issues_;
};

void read_mask(Reader& rd, const YAML::Node& n, MaskSpec& m, std::vector<Issue>& issues) {
  if (!rd.section(n, "mask.", {"type", "base_cutoff_deg", "profiles"})) return;
  rd.get(n, "type", "mask.", m.type, "open-sky or canyon");
  rd.get(n, "base_cutoff_deg", "mask.", m.base_cutoff_deg, "a number");
  if (const auto ps = n["profiles"]) {
    if (!ps.IsSequence()) {
      issues.push_back({"mask.profiles", "expected a list"});
      return;
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string p = "mask.profiles[" + std::to_string(i) + "].";
      ProfileSpec prof;
      if (!rd.section(ps[i], p, {"name", "wall_deg", "corridor_half_width_deg", "along_deg"})) continue;
      rd.get(ps[i], "name", p, prof.name, "a name");
      rd.get(ps[i], "wall_deg", p, prof.wall_deg, "a number");
      rd.get(ps[i], "corridor_half_width_deg", p, prof.corridor_half_width_deg, "a number");
      rd.get(ps[i], "along_deg", p, prof.along_deg, "a number");
      m.profiles.push_back(prof);
    }
  }
}

void read_receiver(Reader& rd, const YAML::Node& n, ReceiverSpec& r, std::vector<Issue>& issues) {
  if (!rd.section(n, "receiver.",
                  {"type", "lat_deg", "lon_deg", "height_m", "sample_step_s", "segments", "file"})) {
    return;
  }
  rd.get(n, "type", "receiver.", r.type, "static, street-drive or csv");
  rd.get(n, "lat_deg", "receiver.", r.lat_deg, "a number");
  rd.get(n, "lon_deg", "receiver.", r.lon_deg, "a number");
  rd.get(n, "height_m", "receiver.", r.height_m, "a number");
  rd.get(n, "sample_step_s", "receiver.", r.sample_step_s, "a number");
  rd.get(n, "file", "receiver.", r.file, "a path");
  if (const auto segs = n["segments"]) {
    if (!segs.IsSequence()) {
      issues.push_back({"receiver.segments", "expected a list"});
      return;
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string p = "receiver.segments[" + std::to_string(i) + "].";
      SegmentSpec seg;
      if (!rd.section(segs[i], p, {"heading_deg", "duration_s", "speed_mps", "profile"})) continue;
      rd.get(segs[i], "heading_deg", p, seg.heading_deg, "a number");
      rd.get(segs[i], "duration_s", p, seg.duration_s, "a number");
      rd.get(segs[i], "speed_mps", p, seg.speed_mps, "a number");
      rd.get(segs[i], "profile", p, seg.profile, "a profile name");
      r.segments.push_back(seg);
    }
  }
}

void read_sync(Reader& rd, const YAML::Node& n, SyncSpec& s, std::vector<Issue>& issues) {
  s.enabled = true;
  if (!rd.section(n, "sync.",
                  {"nodes", "spacing_m", "speed_mps", "heading_deg", "max_skew", "max_offset_s", "pps_preset",
                   "duration_s", "warmup_s", "eval_rate_hz", "sync_period_s", "ftsp_beacon_period_s",
                   "inband_fallback", "protocols", "channels", "outages"})) {
    return;
  }
  const std::string p = "sync.";
  rd.get(n, "nodes", p, s.nodes, "an integer");
  rd.get(n, "spacing_m", p, s.spacing_m, "a number");
  rd.get(n, "speed_mps", p, s.speed_mps, "a number");
  rd.get(n, "heading_deg", p, s.heading_deg, "a number");
  rd.get(n, "max_skew", p, s.max_skew, "a number");
  rd.get(n, "max_offset_s", p, s.max_offset_s, "a number");
  rd.get(n, "pps_preset", p, s.pps_preset, "a preset name");
  rd.get(n, "duration_s", p, s.duration_s, "a number");
  rd.get(n, "warmup_s", p, s.warmup_s, "a number");
  rd.get(n, "eval_rate_hz", p, s.eval_rate_hz, "a number");
  rd.get(n, "sync_period_s", p, s.sync_period_s, "a number");
  rd.get(n, "ftsp_beacon_period_s", p, s.ftsp_beacon_period_s, "a number");
  rd.get(n, "inband_fallback", p, s.inband_fallback, "true or false");
  rd.strings(n, "protocols", p, s.protocols);
  if (const auto ch = n["channels"]) {
    if (rd.section(ch, "sync.channels.", {"gnss", "tpsn", "rbs", "ftsp", "cts"})) {
      for (const auto& kv : ch) {
        const auto name = kv.first.as<std::string>();
        const std::string cp = "sync.channels." + name + ".";
        ChannelSpec c;
        if (!rd.section(kv.second, cp, {"range_m", "tx_mean_us", "tx_jitter_us", "rx_mean_us", "rx_jitter_us"})) {
          continue;
        }
        rd.get(kv.second, "range_m", cp, c.range_m, "a number");
        rd.get(kv.second, "tx_mean_us", cp, c.tx_mean_us, "a number");
        rd.get(kv.second, "tx_jitter_us", cp, c.tx_jitter_us, "a number");
        rd.get(kv.second, "rx_mean_us", cp, c.rx_mean_us, "a number");
        rd.get(kv.second, "rx_jitter_us", cp, c.rx_jitter_us, "a number");
        s.channels[name] = c;
      }
    }
  }
  if (const auto out = n["outages"]) {
    if (!out.IsSequence()) {
      issues.push_back({"sync.outages", "expected a list"});
      return;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::string op = "sync.outages[" + std::to_string(i) + "].";
      OutageSpec o;
      if (!rd.section(out[i], op, {"node", "from_s", "to_s"})) continue;
      rd.get(out[i], "node", op, o.node, "an integer");
      rd.get(out[i], "from_s", op, o.from_s, "a number");
      rd.get(out[i], "to_s", op, o.to_s, "a number");
      s.outages.push_back(o);
    }
  }
}

std::filesystem::path resolve(const Scenario& s, const std::string& file) {
  std::filesystem::path p(file);
  if (p.is_relative() && !s.base_dir.empty()) p = s.base_dir / p;
  return p;
}

void check_positive(std::vector<Issue>& out, const std::string& path, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) out.push_back({path, "must be > 0"});
}

void check_nonnegative(std::vector<Issue>& out, const std::string& path, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) out.push_back({path, "must be >= 0"});
}

void check_elevation(std::vector<Issue>& out, const std::string& path, double deg) {
  if (!(deg >= 0.0 && deg < 90.0)) out.push_back({path, "must lie in [0, 90)"});
}

int profile_index(const Scenario& s, const std::string& name) {
  if (name.empty()) return 0;
  for (std::size_t i = 0; i < s.mask.profiles.size(); ++i) {
    if (s.mask.profiles[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::string known_protocol_list() {
  std::string out;
  for (const auto& n : protocols::known_protocols()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(ErrorCode::kConfiguration, "invalid scenario: " + join_issues(issues)), issues_(std::move(issues)) {}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::kParse, std::string("scenario is not valid YAML: ") + e.what());
  }
  Scenario s;
  s.base_dir = base_dir;
  Reader rd(s.parse_issues);
  if (!root || root.IsNull()) {
    s.parse_issues.push_back({"<root>", "empty scenario"});
    return s;
  }
  if (!rd.section(root, "", {"name", "seed", "duration_s", "epoch_step_s", "gdop_threshold", "constellations",
                             "constellation_file", "availability", "mask", "receiver", "pvt", "sync",
                             "pps_bench"})) {
    return s;
  }
  rd.get(root, "name", "", s.name, "a name");
  rd.get(root, "seed", "", s.seed, "an unsigned integer");
  rd.get(root, "duration_s", "", s.duration_s, "a number");
  rd.get(root, "epoch_step_s", "", s.epoch_step_s, "a number");
  rd.get(root, "gdop_threshold", "", s.gdop_threshold, "a number");
  rd.strings(root, "constellations", "", s.constellations);
  rd.get(root, "constellation_file", "", s.constellation_file, "a path");
  rd.get(root, "availability", "", s.availability, "true or false");
  if (root["mask"]) read_mask(rd, root["mask"], s.mask, s.parse_issues);
  if (root["receiver"]) read_receiver(rd, root["receiver"], s.receiver, s.parse_issues);
  if (const auto pv = root["pvt"]) {
    s.pvt.enabled = true;
    if (rd.section(pv, "pvt.", {"sigma_pseudorange_m", "sigma_doppler_mps", "clock_bias_s", "clock_drift"})) {
      rd.get(pv, "sigma_pseudorange_m", "pvt.", s.pvt.sigma_pseudorange_m, "a number");
      rd.get(pv, "sigma_doppler_mps", "pvt.", s.pvt.sigma_doppler_mps, "a number");
      rd.get(pv, "clock_bias_s", "pvt.", s.pvt.clock_bias_s, "a number");
      rd.get(pv, "clock_drift", "pvt.", s.pvt.clock_drift, "a number");
    }
  }
  if (root["sync"]) read_sync(rd, root["sync"], s.sync, s.parse_issues);
  if (const auto pb = root["pps_bench"]) {
    s.pps_bench.enabled = true;
    if (rd.section(pb, "pps_bench.", {"hours", "presets", "window_s"})) {
      rd.get(pb, "hours", "pps_bench.", s.pps_bench.hours, "a number");
      rd.get(pb, "window_s", "pps_bench.", s.pps_bench.window_s, "a number");
      rd.strings(pb, "presets", "pps_bench.", s.pps_bench.presets);
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::vector<Issue> validate(const Scenario& s) {
  std::vector<Issue> out = s.parse_issues;
  if (!s.seed) out.push_back({"seed", "required (every run is seeded)"});
  check_positive(out, "duration_s", s.duration_s);
  check_positive(out, "epoch_step_s", s.epoch_step_s);
  check_positive(out, "gdop_threshold", s.gdop_threshold);

  if (s.constellations.empty()) out.push_back({"constellations", "at least one constellation set is required"});
  for (std::size_t i = 0; i < s.constellations.size(); ++i) {
    try {
      constellation::parse_constellation_set(s.constellations[i]);
    } catch (const Error& e) {
      out.push_back({"constellations[" + std::to_string(i) + "]", e.what()});
    }
  }
  if (!s.constellation_file.empty()) {
    const auto p = resolve(s, s.constellation_file);
    try {
      constellation::load_constellation(p);
    } catch (const Error& e) {
      out.push_back({"constellation_file", e.what()});
    }
  }

  check_elevation(out, "mask.base_cutoff_deg", s.mask.base_cutoff_deg);
  if (s.mask.type == "canyon") {
    if (s.mask.profiles.empty()) out.push_back({"mask.profiles", "a canyon mask needs at least one profile"});
    std::set<std::string> names;
    for (std::size_t i = 0; i < s.mask.profiles.size(); ++i) {
      const auto& p = s.mask.profiles[i];
      const std::string path = "mask.profiles[" + std::to_string(i) + "]";
      if (!names.insert(p.name).second) out.push_back({path + ".name", "duplicate profile name"});
      check_elevation(out, path + ".wall_deg", p.wall_deg);
      check_elevation(out, path + ".along_deg", p.along_deg);
      if (p.wall_deg < s.mask.base_cutoff_deg) out.push_back({path + ".wall_deg", "below the base cutoff"});
      if (p.along_deg < s.mask.base_cutoff_deg) out.push_back({path + ".along_deg", "below the base cutoff"});
      if (!(p.corridor_half_width_deg >= 0.0 && p.corridor_half_width_deg <= 90.0)) {
        out.push_back({path + ".corridor_half_width_deg", "must lie in [0, 90]"});
      }
    }
  } else if (s.mask.type != "open-sky") {
    out.push_back({"mask.type", "unknown mask type '" + s.mask.type + "' (known: open-sky, canyon)"});
  }

  const auto& r = s.receiver;
  if (!(r.lat_deg >= -90.0 && r.lat_deg <= 90.0)) out.push_back({"receiver.lat_deg", "must lie in [-90, 90]"});
  if (!(r.lon_deg >= -180.0 && r.lon_deg <= 360.0)) out.push_back({"receiver.lon_deg", "must lie in [-180, 360]"});
  check_positive(out, "receiver.sample_step_s", r.sample_step_s);
  if (r.type == "street-drive") {
    if (r.segments.empty()) out.push_back({"receiver.segments", "a street drive needs at least one segment"});
    for (std::size_t i = 0; i < r.segments.size(); ++i) {
      const auto& seg = r.segments[i];
      const std::string path = "receiver.segments[" + std::to_string(i) + "]";
      check_positive(out, path + ".duration_s", seg.duration_s);
      check_nonnegative(out, path + ".speed_mps", seg.speed_mps);
      if (!seg.profile.empty() && (s.mask.type != "canyon" || profile_index(s, seg.profile) < 0)) {
        out.push_back({path + ".profile", "no mask profile named '" + seg.profile + "'"});
      }
    }
  } else if (r.type == "csv") {
    if (r.file.empty()) {
      out.push_back({"receiver.file", "required for a csv receiver"});
    } else {
      try {
        load_trajectory_csv(resolve(s, r.file));
      } catch (const Error& e) {
        out.push_back({"receiver.file", e.what()});
      }
    }
  } else if (r.type != "static") {
    out.push_back({"receiver.type", "unknown receiver type '" + r.type + "' (known: static, street-drive, csv)"});
  }

  if (s.pvt.enabled) {
    check_nonnegative(out, "pvt.sigma_pseudorange_m", s.pvt.sigma_pseudorange_m);
    check_nonnegative(out, "pvt.sigma_doppler_mps", s.pvt.sigma_doppler_mps);
    if (!std::isfinite(s.pvt.clock_bias_s)) out.push_back({"pvt.clock_bias_s", "must be finite"});
    if (!(std::abs(s.pvt.clock_drift) < 1e-4)) out.push_back({"pvt.clock_drift", "must be below 1e-4 in magnitude"});
  }

  if (s.sync.enabled) {
    const auto& y = s.sync;
    if (y.protocols.empty()) out.push_back({"sync.protocols", "select at least one protocol"});
    std::set<std::string> chosen;
    for (std::size_t i = 0; i < y.protocols.size(); ++i) {
      const std::string path = "sync.protocols[" + std::to_string(i) + "]";
      try {
        protocols::parse_protocol(y.protocols[i]);
      } catch (const Error&) {
        out.push_back({path, "unknown protocol '" + y.protocols[i] + "' (known: " + known_protocol_list() + ")"});
      }
      if (!chosen.insert(y.protocols[i]).second) out.push_back({path, "listed twice"});
    }
    const int min_nodes = chosen.count("rbs") ? 3 : 2;
    if (y.nodes < min_nodes) {
      out.push_back({"sync.nodes", "needs at least " + std::to_string(min_nodes) + " nodes"});
    }
    check_positive(out, "sync.spacing_m", y.spacing_m);
    check_nonnegative(out, "sync.speed_mps", y.speed_mps);
    check_nonnegative(out, "sync.max_skew", y.max_skew);
    if (!(y.max_skew < 1e-4)) out.push_back({"sync.max_skew", "must be below 1e-4"});
    check_nonnegative(out, "sync.max_offset_s", y.max_offset_s);
    try {
      clocks::parse_pps_preset(y.pps_preset);
    } catch (const Error& e) {
      out.push_back({"sync.pps_preset", e.what()});
    }
    check_positive(out, "sync.duration_s", y.duration_s);
    check_nonnegative(out, "sync.warmup_s", y.warmup_s);
    if (y.warmup_s >= y.duration_s) out.push_back({"sync.warmup_s", "must be shorter than sync.duration_s"});
    check_positive(out, "sync.eval_rate_hz", y.eval_rate_hz);
    check_positive(out, "sync.sync_period_s", y.sync_period_s);
    check_positive(out, "sync.ftsp_beacon_period_s", y.ftsp_beacon_period_s);
    if (y.eval_rate_hz > 0.0 && 1e-3 >= 1.0 / y.eval_rate_hz) {
      out.push_back({"sync.eval_rate_hz", "must be below 1000 Hz"});
    }
    for (const auto& [name, c] : y.channels) {
      const std::string path = "sync.channels." + name;
      if (c.range_m) check_positive(out, path + ".range_m", *c.range_m);
      if (c.tx_mean_us) check_nonnegative(out, path + ".tx_mean_us", *c.tx_mean_us);
      if (c.tx_jitter_us) check_nonnegative(out, path + ".tx_jitter_us", *c.tx_jitter_us);
      if (c.rx_mean_us) check_nonnegative(out, path + ".rx_mean_us", *c.rx_mean_us);
      if (c.rx_jitter_us) check_nonnegative(out, path + ".rx_jitter_us", *c.rx_jitter_us);
    }
    std::map<int, std::vector<std::pair<double, double>>> per_node;
    for (std::size_t i = 0; i < y.outages.size(); ++i) {
      const auto& o = y.outages[i];
      const std::string path = "sync.outages[" + std::to_string(i) + "]";
      if (o.node < 0 || o.node >= y.nodes) out.push_back({path + ".node", "no such node"});
      check_nonnegative(out, path + ".from_s", o.from_s);
      if (!(o.to_s > o.from_s)) out.push_back({path + ".to_s", "must be after from_s"});
      per_node[o.node].push_back({o.from_s, o.to_s});
    }
    for (auto& [node, spans] : per_node) {
      std::sort(spans.begin(), spans.end());
      for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i].first <= spans[i - 1].second) {
          out.push_back({"sync.outages", "outages of node " + std::to_string(node) + " overlap"});
        }
      }
    }
  }

  if (s.pps_bench.enabled) {
    check_positive(out, "pps_bench.hours", s.pps_bench.hours);
    check_positive(out, "pps_bench.window_s", s.pps_bench.window_s);
    if (s.pps_bench.presets.empty()) out.push_back({"pps_bench.presets", "list at least one preset"});
    for (std::size_t i = 0; i < s.pps_bench.presets.size(); ++i) {
      try {
        clocks::parse_pps_preset(s.pps_bench.presets[i]);
      } catch (const Error& e) {
        out.push_back({"pps_bench.presets[" + std::to_string(i) + "]", e.what()});
      }
    }
  }
  return out;
}

std::uint64_t component_seed(const Scenario& s, std::string_view component) {
  return derive_seed(s.seed.value_or(0), component);
}

std::vector<constellation::OrbitElements> build_constellation(const Scenario& s) {
  if (!s.constellation_file.empty()) return constellation::load_constellation(resolve(s, s.constellation_file));
  return constellation::build_nominal_constellation(constellation::ConstellationSet::kGpsPlusBds, 0.0);
}

Trajectory build_trajectory(const Scenario& s) {
  const auto& r = s.receiver;
  if (r.type == "csv") return load_trajectory_csv(resolve(s, r.file));
  if (r.type == "street-drive") {
    std::vector<StreetSegment> segs;
    double covered = 0.0;
    for (std::size_t k = 0; covered < s.duration_s; ++k) {
      const auto& spec = r.segments[k % r.segments.size()];
      const double d = std::min(spec.duration_s, s.duration_s - covered);
      segs.push_back({spec.heading_deg, d, spec.speed_mps, profile_index(s, spec.profile)});
      covered += d;
    }
    return street_drive(r.lat_deg, r.lon_deg, segs, r.sample_step_s);
  }
  return static_trajectory(geocentric_to_ecef(deg2rad(r.lat_deg), deg2rad(r.lon_deg), r.height_m), s.duration_s);
}

visibility::MaskModel build_mask(const Scenario& s) {
  const double base = deg2rad(s.mask.base_cutoff_deg);
  if (s.mask.type != "canyon") return visibility::MaskModel::fixed(visibility::VisibilityMask::open_sky(base));
  std::vector<visibility::CanyonProfile> profiles;
  for (const auto& p : s.mask.profiles) {
    profiles.push_back({p.name, deg2rad(p.wall_deg), deg2rad(p.corridor_half_width_deg), deg2rad(p.along_deg)});
  }
  return visibility::MaskModel::canyon(std::move(profiles), base);
}

std::vector<protocols::VehicleNode> build_nodes(const Scenario& s) {
  const auto& y = s.sync;
  protocols::PlatoonSpec spec;
  spec.count = y.nodes;
  spec.lat_deg = s.receiver.lat_deg;
  spec.lon_deg = s.receiver.lon_deg;
  spec.heading_deg = y.heading_deg;
  spec.spacing_m = y.spacing_m;
  spec.speed_mps = y.speed_mps;
  spec.max_skew = y.max_skew;
  spec.max_offset_s = y.max_offset_s;
  spec.duration_s = y.duration_s;
  auto nodes = protocols::platoon_nodes(spec, component_seed(s, "nodes"));
  const auto preset = clocks::parse_pps_preset(y.pps_preset);
  const std::uint64_t pps_seed = component_seed(s, "pps");
  for (auto& n : nodes) {
    n.pps = clocks::pps_preset_receiver(preset, pps_seed, n.id);
    std::vector<std::pair<double, double>> spans;
    for (const auto& o : y.outages) {
      if (o.node == n.id) spans.push_back({o.from_s, o.to_s});
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<double, bool>> changes;
    if (spans.front().first > 0.0) changes.push_back({0.0, true});
    for (const auto& [from, to] : spans) {
      changes.push_back({from, false});
      changes.push_back({to, true});
    }
    n.gnss = protocols::AvailabilityTrace(std::move(changes));
  }
  return nodes;
}

namespace {

std::vector<PvtRun> run_pvt(const Scenario& s, const std::vector<constellation::OrbitElements>& elements,
                            const Trajectory& traj, const std::vector<visibility::AvailabilityResult>& avail) {
  std::map<std::string, const constellation::OrbitElements*> by_id;
  for (const auto& el : elements) by_id[el.sat_id] = &el;
  const std::uint64_t base = component_seed(s, "pvt");

  std::vector<PvtRun> runs;
  for (const auto& res : avail) {
    PvtRun run;
    run.constellation = res.report.constellation;
    const std::uint64_t set_seed = mix_seed(base, fnv1a64(run.constellation));
    for (std::size_t e = 0; e < res.records.size(); ++e) {
      const auto& rec = res.records[e];
      PvtRecord out{rec.t, false, rec.nsat, nan(), nan(), nan(), nan()};
      if (rec.nsat >= 4) {
        estimation::ReceiverTruth truth;
        truth.position_m = traj.at(rec.t).position_m;
        truth.velocity_mps = traj.at(rec.t + 0.5).position_m - traj.at(rec.t - 0.5).position_m;
        truth.clock_bias_s = s.pvt.clock_bias_s + s.pvt.clock_drift * rec.t;
        truth.clock_drift_s_per_s = s.pvt.clock_drift;
        std::vector<estimation::SatelliteInput> sats;
        for (const auto& id : rec.visible_ids) {
          sats.push_back({id, constellation::propagate(*by_id.at(id), rec.t), {}});
        }
        const estimation::MeasurementNoiseModel noise{s.pvt.sigma_pseudorange_m, s.pvt.sigma_doppler_mps,
                                                      mix_seed(set_seed, e)};
        const auto meas = estimation::simulate_pseudoranges(truth, sats, noise);
        estimation::SolverOptions opt;
        opt.gdop_threshold = s.gdop_threshold;
        try {
          const auto sol = estimation::solve_pvt(meas, opt);
          out.valid = sol.valid;
          out.gdop = sol.dop.gdop;
          out.tdop = sol.dop.tdop;
          out.bias_ns = sol.clock_bias_s * 1e9;
          out.pos_err_m = (sol.position_m - truth.position_m).norm();
        } catch (const Error& err) {
          // Singular or non-converging geometry is an invalid epoch, not a failure.
          if (err.code() != ErrorCode::kGeometrySingular && err.code() != ErrorCode::kNonConvergence) throw;
        }
      }
      run.records.push_back(out);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

protocols::ComparisonReport run_sync(const Scenario& s) {
  const auto& y = s.sync;
  protocols::CompareSpec spec;
  spec.nodes = build_nodes(s);
  spec.seed = *s.seed;
  spec.config.duration_s = y.duration_s;
  spec.config.warmup_s = y.warmup_s;
  spec.config.eval_rate_hz = y.eval_rate_hz;
  spec.config.sync_period_s = y.sync_period_s;
  spec.ftsp_beacon_period_s = y.ftsp_beacon_period_s;
  spec.gnss.inband_fallback = y.inband_fallback;
  for (const auto& name : y.protocols) spec.protocols.push_back(protocols::parse_protocol(name));
  for (const auto& [name, c] : y.channels) {
    const auto p = protocols::parse_protocol(name);
    auto ch = protocols::calibrated_channel(p, derive_seed(*s.seed, "channel." + name));
    if (c.range_m) ch.comm_range_m = *c.range_m;
    if (c.tx_mean_us) ch.tx.mean_us = *c.tx_mean_us;
    if (c.tx_jitter_us) ch.tx.jitter_us = *c.tx_jitter_us;
    if (c.rx_mean_us) ch.rx.mean_us = *c.rx_mean_us;
    if (c.rx_jitter_us) ch.rx.jitter_us = *c.rx_jitter_us;
    if (p == protocols::Protocol::kGnss) {
      spec.gnss.fallback_channel = ch;
    } else {
      spec.channels[p] = ch;
    }
  }
  if (y.inband_fallback && !y.channels.count("gnss")) {
    spec.gnss.fallback_channel =
        protocols::calibrated_channel(protocols::Protocol::kFtsp, derive_seed(*s.seed, "channel.gnss"));
  }
  return protocols::compare_protocols(spec);
}

std::vector<PpsBenchResult> run_pps(const Scenario& s) {
  std::vector<PpsBenchResult> out;
  const auto n = static_cast<std::size_t>(std::llround(s.pps_bench.hours * 3600.0));
  for (const auto& name : s.pps_bench.presets) {
    const auto preset = clocks::parse_pps_preset(name);
    const std::string canonical(clocks::to_string(preset));
    const auto [a, b] = clocks::pps_preset_pair(preset, component_seed(s, "pps_bench." + canonical));
    PpsBenchResult r;
    r.preset = canonical;
    r.series = clocks::pairwise_pps_series(a, b, n);
    r.stats = analysis::offset_statistics(r.series);
    const double span = r.series.samples.back().t_s - r.series.samples.front().t_s;
    if (span >= s.pps_bench.window_s) r.window_means = analysis::moving_window_mean(r.series, s.pps_bench.window_s);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

RunArtifacts run(const Scenario& s, const std::vector<Stage>& stages) {
  if (auto issues = validate(s); !issues.empty()) throw ValidationError(std::move(issues));
  auto wanted = [&](Stage st) {
    if (!stages.empty()) return std::find(stages.begin(), stages.end(), st) != stages.end();
    switch (st) {
      case Stage::kAvailability: return s.availability;
      case Stage::kPvt: return s.pvt.enabled;
      case Stage::kSync: return s.sync.enabled;
      case Stage::kPps: return s.pps_bench.enabled;
    }
    return false;
  };
  if (wanted(Stage::kSync) && !s.sync.enabled) {
    throw ValidationError(std::vector<Issue>{{"sync", "the scenario has no sync section"}});
  }
  if (wanted(Stage::kPps) && !s.pps_bench.enabled) {
    throw ValidationError(std::vector<Issue>{{"pps_bench", "the scenario has no pps_bench section"}});
  }

  const std::string ctx = "scenario '" + s.name + "': ";
  RunArtifacts art;
  try {
    if (wanted(Stage::kAvailability) || wanted(Stage::kPvt)) {
      const auto elements = build_constellation(s);
      const auto traj = build_trajectory(s);
      std::vector<constellation::ConstellationSet> sets;
      for (const auto& c : s.constellations) sets.push_back(constellation::parse_constellation_set(c));
      auto avail = visibility::availability_for_sets(elements, sets, traj, build_mask(s), s.epoch_step_s,
                                                     s.gdop_threshold);
      if (wanted(Stage::kPvt)) art.pvt = run_pvt(s, elements, traj, avail);
      if (wanted(Stage::kAvailability)) art.availability = std::move(avail);
    }
    if (wanted(Stage::kSync)) art.sync = run_sync(s);
    if (wanted(Stage::kPps)) art.pps = run_pps(s);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), ctx + e.what());
  }
  return art;
}

}  // namespace vts::scenario
