#pragma once

#include "vts/analysis.hpp"
#include "vts/protocols/protocols.hpp"
#include "vts/scenario.hpp"
#include "vts/visibility.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace vts::report {

enum class Format { kTable, kJson, kCsv };
Format parse_format(std::string_view name);

/// Writes to a sibling temp file, then renames over `path`. Parent
/// directories are created.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Writes every file or none: all temp files are written first, then renamed.
void write_all_atomic(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

// Availability --------------------------------------------------------------
std::string availability_json(const std::vector<visibility::AvailabilityResult>& results,
                              const std::string& scenario_name);
/// constellation,t_s,nsat,gdop,class,visible
std::string availability_epochs_csv(const std::vector<visibility::AvailabilityResult>& results);
/// One row per constellation with the class and GDOP percentages.
std::string availability_summary_csv(const std::vector<visibility::AvailabilityResult>& results);
/// Two tables: satellites-in-view bins and the GDOP breakdown.
std::string availability_table(const std::vector<visibility::AvailabilityResult>& results);

// PVT -----------------------------------------------------------------------
/// t,valid,nsat,gdop,tdop,bias_ns,pos_err_m (empty fields where undefined).
std::string pvt_csv(const scenario::PvtRun& run);

// Sync ----------------------------------------------------------------------
/// node_a,node_b,t_s,error_ns
std::string sync_trace_csv(const protocols::SyncResult& result);
std::string comparison_json(const protocols::ComparisonReport& report, const std::string& scenario_name);
std::string comparison_csv(const protocols::ComparisonReport& report);
/// Ranked by RMS, with message counts.
std::string comparison_table(const protocols::ComparisonReport& report);

// PPS -----------------------------------------------------------------------
std::string stats_json(const std::vector<analysis::StatsRow>& rows,
                       const std::vector<std::pair<std::string, analysis::OffsetSeries>>& window_means);
std::string stats_csv(const std::vector<analysis::StatsRow>& rows);
/// Min / max of the moving-window means per session.
std::string window_table(const std::vector<std::pair<std::string, analysis::OffsetSeries>>& window_means,
                         double window_s);

/// All files of a run, keyed by file name relative to the output directory.
std::vector<std::pair<std::string, std::string>> render_artifacts(const scenario::RunArtifacts& art,
                                                                  const scenario::Scenario& s);

}  // namespace vts::report
