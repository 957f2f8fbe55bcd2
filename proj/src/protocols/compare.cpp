#include "vts/protocols/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vts::protocols {

ComparisonReport compare_protocols(const CompareSpec& spec) {
  if (spec.nodes.empty()) throw Error(ErrorCode::kConfiguration, "no nodes");
  if (spec.protocols.empty()) throw Error(ErrorCode::kConfiguration, "no protocols selected");
  const auto& cfg = spec.config;
  check_config(cfg);

  auto channel_for = [&](Protocol p) {
    if (auto it = spec.channels.find(p); it != spec.channels.end()) return it->second;
    return calibrated_channel(p, derive_seed(spec.seed, "channel." + std::string(to_string(p))));
  };
  const auto rounds = static_cast<std::size_t>(std::ceil(cfg.duration_s / cfg.sync_period_s - 1e-9));

  ComparisonReport report;
  for (Protocol p : spec.protocols) {
    switch (p) {
      case Protocol::kGnss:
        report.results.push_back(run_gnss_sync(spec.nodes, cfg, spec.gnss));
        break;
      case Protocol::kTpsn: {
        int root = spec.nodes.front().id;
        for (const auto& n : spec.nodes) root = std::min(root, n.id);
        report.results.push_back(
            run_tpsn(spec.nodes, channel_for(p), spec.tpsn_root.value_or(root), rounds, cfg, spec.tpsn));
        break;
      }
      case Protocol::kRbs:
        report.results.push_back(run_rbs(spec.nodes, channel_for(p), rounds, cfg, spec.rbs));
        break;
      case Protocol::kFtsp:
        report.results.push_back(
            run_ftsp(spec.nodes, channel_for(p), cfg.duration_s, spec.ftsp_beacon_period_s, cfg, spec.ftsp));
        break;
      case Protocol::kCts:
        report.results.push_back(run_cts(spec.nodes, channel_for(p), cfg.duration_s, cfg, spec.cts));
        break;
    }
  }

  for (std::size_t i = 0; i < report.results.size(); ++i) report.ranking.push_back(i);
  std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
    return report.results[a].summary.rms_s < report.results[b].summary.rms_s;
  });

  double gnss = -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : report.results) {
    if (r.summary.n == 0) continue;
    if (r.protocol == Protocol::kGnss) {
      gnss = r.summary.rms_s;
    } else {
      best = std::min(best, r.summary.rms_s);
    }
  }
  if (gnss > 0.0 && std::isfinite(best)) report.separation_ratio = best / gnss;
  return report;
}

}  // namespace vts::protocols
