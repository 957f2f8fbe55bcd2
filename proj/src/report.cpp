#include "vts/report.hpp"

#include "json.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace vts::report {
namespace {

using nlohmann::json;

// Shortest text that parses back to the same double.
std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pct(double v) { return fixed(v, 2) + "%"; }

std::string pretty_time(double s) {
  const double a = std::abs(s);
  if (a == 0.0) return "0 s";
  if (a < 1e-6) return fixed(s * 1e9, 2) + " ns";
  if (a < 1e-3) return fixed(s * 1e6, 3) + " us";
  if (a < 1.0) return fixed(s * 1e3, 3) + " ms";
  return fixed(s, 3) + " s";
}

std::string pad(const std::string& s, std::size_t w, bool left = false) {
  if (s.size() >= w) return s;
  return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
}

std::string file_tag(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    if (c == '+') return '_';
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "table") return Format::kTable;
  if (name == "json") return Format::kJson;
  if (name == "csv") return Format::kCsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown format '" + std::string(name) + "' (known: table, json, csv)");
}

namespace {

std::filesystem::path temp_name(const std::filesystem::path& path) {
  return path.parent_path() / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  write_all_atomic({{path, content}});
}

void write_all_atomic(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
  std::vector<std::filesystem::path> temps;
  try {
    for (const auto& [path, content] : files) {
      std::error_code ec;
      if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path(), ec);
      if (ec) throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string() + ": " + ec.message());
      temps.push_back(temp_name(path));
      write_file(temps.back(), content);
    }
  } catch (...) {
    for (const auto& t : temps) {
      std::error_code ec;
      std::filesystem::remove(t, ec);
    }
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files[i].first, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot move into place " + files[i].first.string() + ": " + ec.message());
  }
}

std::string availability_json(const std::vector<visibility::AvailabilityResult>& results,
                              const std::string& scenario_name) {
  json j;
  j["scenario"] = scenario_name;
  j["constellations"] = json::array();
  for (const auto& r : results) {
    const auto& a = r.report;
    j["gdop_threshold"] = a.gdop_threshold;
    j["constellations"].push_back({{"constellation", a.constellation},
                                   {"epochs", a.epoch_count},
                                   {"nsat_ge4_pct", a.pct_ge4},
                                   {"nsat_1_to_3_pct", a.pct_one_to_three},
                                   {"nsat_0_pct", a.pct_zero},
                                   {"nsat_ge1_pct", a.pct_nsat_ge1()},
                                   {"nsat_lt4_pct", a.pct_nsat_lt4},
                                   {"gdop_ok_pct", a.pct_gdop_ok},
                                   {"gdop_high_pct", a.pct_gdop_high}});
  }
  return j.dump(2) + "\n";
}

std::string availability_epochs_csv(const std::vector<visibility::AvailabilityResult>& results) {
  std::string out = "constellation,t_s,nsat,gdop,class,visible\n";
  for (const auto& r : results) {
    for (const auto& rec : r.records) {
      std::string ids;
      for (const auto& id : rec.visible_ids) ids += (ids.empty() ? "" : " ") + id;
      out += r.report.constellation + "," + num(rec.t) + "," + std::to_string(rec.nsat) + "," +
             (rec.gdop ? num(*rec.gdop) : "") + "," + std::string(visibility::to_string(rec.cls)) + "," + ids +
             "\n";
    }
  }
  return out;
}

std::string availability_summary_csv(const std::vector<visibility::AvailabilityResult>& results) {
  std::string out = "constellation,epochs,nsat_ge4_pct,nsat_1_to_3_pct,nsat_0_pct,nsat_lt4_pct,gdop_ok_pct,gdop_high_pct\n";
  for (const auto& r : results) {
    const auto& a = r.report;
    out += a.constellation + "," + std::to_string(a.epoch_count) + "," + num(a.pct_ge4) + "," +
           num(a.pct_one_to_three) + "," + num(a.pct_zero) + "," + num(a.pct_nsat_lt4) + "," + num(a.pct_gdop_ok) +
           "," + num(a.pct_gdop_high) + "\n";
  }
  return out;
}

std::string availability_table(const std::vector<visibility::AvailabilityResult>& results) {
  std::string out = "Satellites in view\n";
  out += pad("GNSS System", 14, true) + pad("NSAT >= 4", 12) + pad("NSAT = 1-3", 12) + pad("NSAT < 1", 12) + "\n";
  for (const auto& r : results) {
    const auto& a = r.report;
    out += pad(a.constellation, 14, true) + pad(pct(a.pct_ge4), 12) + pad(pct(a.pct_one_to_three), 12) +
           pad(pct(a.pct_zero), 12) + "\n";
  }
  const double thr = results.empty() ? 6.0 : results.front().report.gdop_threshold;
  const std::string t = num(thr);
  out += "\nGDOP (threshold " + t + ")\n";
  out += pad("GNSS System", 14, true) + pad("NSAT < 4", 12) + pad("GDOP <= " + t, 12) + pad("GDOP > " + t, 12) +
         "\n";
  for (const auto& r : results) {
    const auto& a = r.report;
    out += pad(a.constellation, 14, true) + pad(pct(a.pct_nsat_lt4), 12) + pad(pct(a.pct_gdop_ok), 12) +
           pad(pct(a.pct_gdop_high), 12) + "\n";
  }
  return out;
}

std::string pvt_csv(const scenario::PvtRun& run) {
  std::string out = "t,valid,nsat,gdop,tdop,bias_ns,pos_err_m\n";
  for (const auto& r : run.records) {
    out += num(r.t) + "," + (r.valid ? "1" : "0") + "," + std::to_string(r.nsat) + "," + num(r.gdop) + "," +
           num(r.tdop) + "," + num(r.bias_ns) + "," + num(r.pos_err_m) + "\n";
  }
  return out;
}

std::string sync_trace_csv(const protocols::SyncResult& result) {
  std::string out = "node_a,node_b,t_s,error_ns\n";
  for (const auto& p : result.pairs) {
    const std::string prefix = std::to_string(p.node_a) + "," + std::to_string(p.node_b) + ",";
    for (std::size_t i = 0; i < p.t.size(); ++i) out += prefix + num(p.t[i]) + "," + num(p.error_s[i] * 1e9) + "\n";
  }
  return out;
}

std::string comparison_json(const protocols::ComparisonReport& report, const std::string& scenario_name) {
  json j;
  j["scenario"] = scenario_name;
  j["protocols"] = json::array();
  for (const auto& r : report.results) {
    j["protocols"].push_back({{"protocol", std::string(protocols::to_string(r.protocol))},
                              {"reference_node", r.reference_node},
                              {"rms_s", r.summary.rms_s},
                              {"mean_abs_s", r.summary.mean_abs_s},
                              {"std_abs_s", r.summary.std_abs_s},
                              {"peak_s", r.summary.peak_s},
                              {"samples", r.summary.n},
                              {"warmup_s", r.warmup_s},
                              {"message_count", r.message_count},
                              {"rounds", r.rounds},
                              {"messages_per_node_per_round", r.messages_per_node_per_round},
                              {"unsynchronized", r.unsynchronized}});
  }
  json ranking = json::array();
  for (std::size_t i : report.ranking) ranking.push_back(std::string(protocols::to_string(report.results[i].protocol)));
  j["ranking"] = ranking;
  j["separation_ratio"] = report.separation_ratio ? num_or_null(*report.separation_ratio) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string comparison_csv(const protocols::ComparisonReport& report) {
  std::string out = "rank,protocol,rms_s,mean_abs_s,std_abs_s,peak_s,samples,message_count,messages_per_node_per_round\n";
  for (std::size_t k = 0; k < report.ranking.size(); ++k) {
    const auto& r = report.results[report.ranking[k]];
    out += std::to_string(k + 1) + "," + std::string(protocols::to_string(r.protocol)) + "," + num(r.summary.rms_s) +
           "," + num(r.summary.mean_abs_s) + "," + num(r.summary.std_abs_s) + "," + num(r.summary.peak_s) + "," +
           std::to_string(r.summary.n) + "," + std::to_string(r.message_count) + "," +
           num(r.messages_per_node_per_round) + "\n";
  }
  return out;
}

std::string comparison_table(const protocols::ComparisonReport& report) {
  std::string out = pad("#", 3) + "  " + pad("Protocol", 9, true) + pad("RMS", 14) + pad("Mean |e|", 14) +
                    pad("Peak", 14) + pad("Messages", 10) + pad("Msg/node/rnd", 14) + "\n";
  for (std::size_t k = 0; k < report.ranking.size(); ++k) {
    const auto& r = report.results[report.ranking[k]];
    out += pad(std::to_string(k + 1), 3) + "  " + pad(std::string(protocols::to_string(r.protocol)), 9, true) +
           pad(pretty_time(r.summary.rms_s), 14) + pad(pretty_time(r.summary.mean_abs_s), 14) +
           pad(pretty_time(r.summary.peak_s), 14) + pad(std::to_string(r.message_count), 10) +
           pad(fixed(r.messages_per_node_per_round, 2), 14) + "\n";
  }
  if (report.separation_ratio) {
    out += "\nbest in-band RMS / GNSS RMS = " + fixed(*report.separation_ratio, 1) + "\n";
  }
  return out;
}

std::string stats_json(const std::vector<analysis::StatsRow>& rows,
                       const std::vector<std::pair<std::string, analysis::OffsetSeries>>& window_means) {
  json j;
  j["sessions"] = json::array();
  for (const auto& r : rows) {
    json row = {{"label", r.label},
                {"peak_pos_ns", r.stats.peak_pos},
                {"peak_neg_ns", r.stats.peak_neg},
                {"peak_abs_ns", r.stats.peak_abs},
                {"mean_ns", r.stats.mean},
                {"std_ns", r.stats.std},
                {"rms_ns", r.stats.rms},
                {"n", r.stats.n}};
    for (const auto& [label, wm] : window_means) {
      if (label != r.label || wm.empty()) continue;
      double lo = wm.samples.front().offset_ns;
      double hi = lo;
      for (const auto& s : wm.samples) {
        lo = std::min(lo, s.offset_ns);
        hi = std::max(hi, s.offset_ns);
      }
      row["window_mean_min_ns"] = lo;
      row["window_mean_max_ns"] = hi;
    }
    j["sessions"].push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string stats_csv(const std::vector<analysis::StatsRow>& rows) {
  std::string out = "label,peak_pos_ns,peak_neg_ns,mean_ns,std_ns,rms_ns,n\n";
  for (const auto& r : rows) {
    out += r.label + "," + num(r.stats.peak_pos) + "," + num(r.stats.peak_neg) + "," + num(r.stats.mean) + "," +
           num(r.stats.std) + "," + num(r.stats.rms) + "," + std::to_string(r.stats.n) + "\n";
  }
  return out;
}

std::string window_table(const std::vector<std::pair<std::string, analysis::OffsetSeries>>& window_means,
                         double window_s) {
  std::string out = "Moving " + fixed(window_s / 3600.0, 1) + " h window means (ns)\n";
  for (const auto& [label, wm] : window_means) {
    if (wm.empty()) {
      out += pad(label, 14, true) + "  series shorter than the window\n";
      continue;
    }
    double lo = wm.samples.front().offset_ns;
    double hi = lo;
    for (const auto& s : wm.samples) {
      lo = std::min(lo, s.offset_ns);
      hi = std::max(hi, s.offset_ns);
    }
    out += pad(label, 14, true) + "  min " + fixed(lo, 2) + "  max " + fixed(hi, 2) + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> render_artifacts(const scenario::RunArtifacts& art,
                                                                  const scenario::Scenario& s) {
  std::vector<std::pair<std::string, std::string>> files;
  if (!art.availability.empty()) {
    files.push_back({"availability.json", availability_json(art.availability, s.name)});
    files.push_back({"availability_epochs.csv", availability_epochs_csv(art.availability)});
    files.push_back({"availability.txt", availability_table(art.availability)});
  }
  for (const auto& run : art.pvt) files.push_back({"pvt_" + file_tag(run.constellation) + ".csv", pvt_csv(run)});
  if (art.sync) {
    for (const auto& r : art.sync->results) {
      files.push_back({"sync_" + std::string(protocols::to_string(r.protocol)) + ".csv", sync_trace_csv(r)});
    }
    files.push_back({"sync_comparison.json", comparison_json(*art.sync, s.name)});
    files.push_back({"sync_comparison.txt", comparison_table(*art.sync)});
  }
  if (!art.pps.empty()) {
    std::vector<analysis::StatsRow> rows;
    std::vector<std::pair<std::string, analysis::OffsetSeries>> windows;
    for (const auto& p : art.pps) {
      files.push_back({"pps_" + file_tag(p.preset) + ".csv", analysis::format_offset_csv(p.series)});
      if (!p.window_means.empty()) {
        files.push_back({"pps_" + file_tag(p.preset) + "_window.csv", analysis::format_offset_csv(p.window_means)});
      }
      rows.push_back({p.preset, p.stats});
      windows.push_back({p.preset, p.window_means});
    }
    files.push_back({"pps_stats.json", stats_json(rows, windows)});
    files.push_back({"pps_stats.txt",
                     analysis::format_stats_table(rows) + "\n" + window_table(windows, s.pps_bench.window_s)});
  }
  return files;
}

}  // namespace vts::report
