#include "vts/cli.hpp"

#include "vts/analysis.hpp"
#include "vts/report.hpp"
#include "vts/scenario.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace vts::cli {
namespace {

struct Unit {
  const char* suffix;
  double scale;
};

constexpr Unit kTimeUnits[] = {{"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}, {"min", 60.0}, {"h", 3600.0}};
constexpr Unit kLengthUnits[] = {{"mm", 1e-3}, {"cm", 1e-2}, {"km", 1e3}, {"m", 1.0}};
constexpr Unit kSpeedUnits[] = {{"km/h", 1.0 / 3.6}, {"kmh", 1.0 / 3.6}, {"kph", 1.0 / 3.6}, {"m/s", 1.0}, {"mps", 1.0}};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string out_dir_default() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "vts-out";
}

struct Common {
  std::string format = "table";
  std::string out_dir;
};

struct Overrides {
  std::string seed;
  std::string duration;
  std::string gdop;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_option("--duration", o.duration, "Override the duration (e.g. 600s, 2h)");
  cmd->add_option("--gdop-threshold", o.gdop, "Override the GDOP validity threshold");
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size() && text.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "--seed expects an unsigned integer, got '" + text + "'");
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, what + " expects a number, got '" + text + "'");
}

scenario::Scenario load_with_overrides(const std::string& path, const Overrides& o) {
  auto s = scenario::load_scenario(path);
  if (!o.seed.empty()) s.seed = parse_seed(o.seed);
  if (!o.duration.empty()) {
    const double d = parse_quantity(o.duration, Quantity::kTime);
    s.duration_s = d;
    s.sync.duration_s = d;
  }
  if (!o.gdop.empty()) s.gdop_threshold = parse_number(o.gdop, "--gdop-threshold");
  return s;
}

void write_files(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files,
                 std::ostream& err) {
  std::vector<std::pair<std::filesystem::path, std::string>> full;
  for (const auto& [name, content] : files) full.push_back({dir / name, content});
  report::write_all_atomic(full);
  err << "wrote " << files.size() << " file(s) to " << dir.string() << "\n";
}

std::string find_file(const std::vector<std::pair<std::string, std::string>>& files, const std::string& name) {
  for (const auto& [n, c] : files) {
    if (n == name) return c;
  }
  return "";
}

// calc ----------------------------------------------------------------------

struct CalcResult {
  std::string name;
  double value;
  std::string unit;
  std::string shown;
  std::string formula;
  std::string note;
};

void print_calc(const CalcResult& r, report::Format f, std::ostream& out) {
  switch (f) {
    case report::Format::kJson: {
      nlohmann::json j = {{"calculation", r.name}, {"value", r.value}, {"unit", r.unit}, {"formula", r.formula}};
      if (!r.note.empty()) j["note"] = r.note;
      out << j.dump(2) << "\n";
      break;
    }
    case report::Format::kCsv: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", r.value);
      out << "calculation,value,unit\n" << r.name << "," << buf << "," << r.unit << "\n";
      break;
    }
    case report::Format::kTable:
      out << r.shown << "\n" << "  " << r.formula << "\n";
      if (!r.note.empty()) out << "  note: " << r.note << "\n";
      break;
  }
}

std::string pretty_time(double s) {
  const double a = std::abs(s);
  if (a < 1e-6) return fixed(s * 1e9, 3) + " ns";
  if (a < 1e-3) return fixed(s * 1e6, 3) + " us";
  if (a < 1.0) return fixed(s * 1e3, 3) + " ms";
  return fixed(s, 3) + " s";
}

// pps -----------------------------------------------------------------------

void print_stats(const std::vector<analysis::StatsRow>& rows,
                 const std::vector<std::pair<std::string, analysis::OffsetSeries>>& windows, double window_s,
                 report::Format f, std::ostream& out) {
  switch (f) {
    case report::Format::kJson: out << report::stats_json(rows, windows); break;
    case report::Format::kCsv: out << report::stats_csv(rows); break;
    case report::Format::kTable:
      out << analysis::format_stats_table(rows) << "\n" << report::window_table(windows, window_s);
      break;
  }
}

analysis::OffsetSeries window_means(const analysis::OffsetSeries& s, double window_s) {
  if (s.size() < 2 || s.samples.back().t_s - s.samples.front().t_s < window_s) return {};
  return analysis::moving_window_mean(s, window_s);
}

}  // namespace

double parse_quantity(std::string_view text, Quantity kind) {
  const std::string t(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "cannot read a number from '" + t + "'");
  }
  std::string unit = t.substr(used);
  while (!unit.empty() && unit.front() == ' ') unit.erase(unit.begin());
  if (unit.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "'" + t + "' has no unit; write e.g. 10ns, 30cm or 110kmh");
  }
  auto match = [&](const auto& table, const char* expected) {
    for (const auto& u : table) {
      if (unit == u.suffix) return v * u.scale;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown unit '" + unit + "' in '" + t + "' (expected " + expected + ")");
  };
  switch (kind) {
    case Quantity::kTime: return match(kTimeUnits, "ns, us, ms, s, min or h");
    case Quantity::kLength: return match(kLengthUnits, "mm, cm, m or km");
    case Quantity::kSpeed: return match(kSpeedUnits, "kmh, km/h, kph, mps or m/s");
  }
  return v;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-synchronization simulation tools for vehicular networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  common.out_dir = out_dir_default();
  app.add_option("--format", common.format, "Output format: table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  app.add_option("--out", common.out_dir, std::string("Output directory (default $") + kOutDirEnv + " or vts-out)");

  std::string scenario_path;
  Overrides ov;

  auto* availability = app.add_subcommand("availability", "Satellite visibility and GDOP availability of a scenario");
  availability->add_option("scenario", scenario_path, "Scenario file")->required();
  add_overrides(availability, ov);

  auto* pps = app.add_subcommand("pps", "Simulate or analyze 1 PPS offset series");
  pps->require_subcommand(1);
  std::string preset = "same-model";
  double hours = 24.0;
  std::string pps_seed = "1";
  std::string window = "2h";
  auto* simulate = pps->add_subcommand("simulate", "Generate a two-receiver offset series");
  simulate->add_option("--preset", preset, "same-model or diff-model");
  simulate->add_option("--hours", hours, "Series length in hours");
  simulate->add_option("--seed", pps_seed, "Seed");
  simulate->add_option("--window", window, "Moving-mean window (e.g. 2h)");
  std::string csv_path;
  auto* analyze = pps->add_subcommand("analyze", "Statistics of a t_s,offset_ns CSV");
  analyze->add_option("csv", csv_path, "Offset CSV")->required();
  analyze->add_option("--window", window, "Moving-mean window (e.g. 2h)");

  auto* sync = app.add_subcommand("sync", "Compare GNSS and in-band synchronization");
  sync->add_option("scenario", scenario_path, "Scenario file")->required();
  add_overrides(sync, ov);

  auto* calc = app.add_subcommand("calc", "Requirement calculators");
  calc->require_subcommand(1);
  long slots = 0;
  std::string slot;
  std::string delta;
  auto* guard = calc->add_subcommand("guard", "Extra TDMA slots gained by shortening the guard interval");
  guard->add_option("--slots", slots, "Slots per frame")->required();
  guard->add_option("--slot", slot, "Slot duration (e.g. 496us)")->required();
  guard->add_option("--delta", delta, "Guard reduction (e.g. 10us)")->required();
  std::string a1;
  std::string a2;
  auto* ranging = calc->add_subcommand("ranging", "Range error caused by a timing error");
  ranging->add_option("timing_error", a1, "e.g. 10ns")->required();
  auto* relpos = calc->add_subcommand("relpos", "Position uncertainty of a moving vehicle");
  relpos->add_option("speed", a1, "e.g. 110kmh")->required();
  relpos->add_option("timing_error", a2, "e.g. 10ms")->required();
  auto* required = calc->add_subcommand("required-timing", "Timing accuracy needed for a position tolerance");
  required->add_option("speed", a1, "e.g. 110kmh")->required();
  required->add_option("tolerance", a2, "e.g. 30cm")->required();

  auto* bundle = app.add_subcommand("report", "Run every stage of a scenario and write all artifacts");
  bundle->add_option("scenario", scenario_path, "Scenario file")->required();
  add_overrides(bundle, ov);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  report::Format format = report::parse_format(common.format);
  const std::filesystem::path out_dir(common.out_dir);

  // Inputs: unreadable or invalid files are validation failures.
  scenario::Scenario scn;
  try {
    if (*availability || *sync || *bundle) {
      scn = load_with_overrides(scenario_path, ov);
      if (const auto issues = scenario::validate(scn); !issues.empty()) {
        err << "invalid scenario " << scenario_path << ":\n";
        for (const auto& i : issues) err << "  " << i.path << ": " << i.message << "\n";
        return kValidation;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (*availability) {
      std::vector<scenario::Stage> stages{scenario::Stage::kAvailability};
      if (scn.pvt.enabled) stages.push_back(scenario::Stage::kPvt);
      const auto art = scenario::run(scn, stages);
      const auto files = report::render_artifacts(art, scn);
      write_files(out_dir, files, err);
      switch (format) {
        case report::Format::kJson: out << find_file(files, "availability.json"); break;
        case report::Format::kCsv: out << report::availability_summary_csv(art.availability); break;
        case report::Format::kTable: out << find_file(files, "availability.txt"); break;
      }
      return kOk;
    }

    if (*sync) {
      const auto art = scenario::run(scn, {scenario::Stage::kSync});
      const auto files = report::render_artifacts(art, scn);
      write_files(out_dir, files, err);
      switch (format) {
        case report::Format::kJson: out << find_file(files, "sync_comparison.json"); break;
        case report::Format::kCsv: out << report::comparison_csv(*art.sync); break;
        case report::Format::kTable: out << find_file(files, "sync_comparison.txt"); break;
      }
      return kOk;
    }

    if (*bundle) {
      const auto art = scenario::run(scn);
      const auto files = report::render_artifacts(art, scn);
      write_files(out_dir, files, err);
      if (format == report::Format::kJson) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& [name, c] : files) j.push_back((out_dir / name).string());
        out << nlohmann::json{{"scenario", scn.name}, {"files", j}}.dump(2) << "\n";
      } else if (format == report::Format::kCsv) {
        out << "file\n";
        for (const auto& [name, c] : files) out << (out_dir / name).string() << "\n";
      } else {
        for (const char* name : {"availability.txt", "sync_comparison.txt", "pps_stats.txt"}) {
          const auto text = find_file(files, name);
          if (!text.empty()) out << text << "\n";
        }
      }
      return kOk;
    }

    if (*simulate) {
      const double window_s = parse_quantity(window, Quantity::kTime);
      const std::uint64_t seed = parse_seed(pps_seed);
      if (!(hours > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--hours must be > 0");
      const auto p = clocks::parse_pps_preset(preset);
      const std::string name(clocks::to_string(p));
      // Same derivation as a scenario's pps_bench stage with this seed.
      const auto [a, b] = clocks::pps_preset_pair(p, derive_seed(seed, "pps_bench." + name));
      const auto series = clocks::pairwise_pps_series(a, b, static_cast<std::size_t>(std::llround(hours * 3600.0)));
      const std::vector<analysis::StatsRow> rows{{name, analysis::offset_statistics(series)}};
      const std::vector<std::pair<std::string, analysis::OffsetSeries>> windows{{name, window_means(series, window_s)}};
      write_files(out_dir,
                  {{"pps_" + name + ".csv", analysis::format_offset_csv(series)},
                   {"pps_stats.json", report::stats_json(rows, windows)}},
                  err);
      print_stats(rows, windows, window_s, format, out);
      return kOk;
    }

    if (*analyze) {
      const double window_s = parse_quantity(window, Quantity::kTime);
      analysis::OffsetSeries series;
      try {
        series = analysis::load_offset_csv(csv_path);
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
      }
      const std::string label = std::filesystem::path(csv_path).filename().string();
      const std::vector<analysis::StatsRow> rows{{label, analysis::offset_statistics(series)}};
      const std::vector<std::pair<std::string, analysis::OffsetSeries>> windows{{label, window_means(series, window_s)}};
      print_stats(rows, windows, window_s, format, out);
      return kOk;
    }

    if (*guard) {
      const double slot_s = parse_quantity(slot, Quantity::kTime);
      const double delta_s = parse_quantity(delta, Quantity::kTime);
      const long gain = analysis::guard_interval_gain(slots, slot_s, delta_s);
      CalcResult r{"guard", static_cast<double>(gain), "slots", std::to_string(gain) + " slots",
                   "floor(slots * delta / slot) = floor(" + std::to_string(slots) + " * " + pretty_time(delta_s) +
                       " / " + pretty_time(slot_s) + ")",
                   ""};
      if (slots == 2016 && std::abs(slot_s - 496e-6) < 1e-12 && std::abs(delta_s - 10e-6) < 1e-12) {
        r.note = "a gain of 45 slots is sometimes quoted for these inputs; the arithmetic gives " +
                 std::to_string(gain);
      }
      print_calc(r, format, out);
      return kOk;
    }
    if (*ranging) {
      const double dt = parse_quantity(a1, Quantity::kTime);
      const double v = analysis::ranging_error(dt);
      print_calc({"ranging", v, "m", fixed(v, 3) + " m", "range error = c * dt", ""}, format, out);
      return kOk;
    }
    if (*relpos) {
      const double speed = parse_quantity(a1, Quantity::kSpeed);
      const double dt = parse_quantity(a2, Quantity::kTime);
      const double v = analysis::relative_position_error(speed, dt);
      print_calc({"relpos", v, "m", fixed(v, 3) + " m", "position error = speed * dt", ""}, format, out);
      return kOk;
    }
    if (*required) {
      const double speed = parse_quantity(a1, Quantity::kSpeed);
      const double tol = parse_quantity(a2, Quantity::kLength);
      const double v = analysis::required_timing_accuracy(speed, tol);
      print_calc({"required-timing", v, "s", pretty_time(v), "timing accuracy = tolerance / speed", ""}, format,
                 out);
      return kOk;
    }
  } catch (const scenario::ValidationError& e) {
    err << "invalid scenario:\n";
    for (const auto& i : e.issues()) err << "  " << i.path << ": " << i.message << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kInvalidArgument:
      case ErrorCode::kConfiguration:
      case ErrorCode::kParse:
        return kValidation;
      default:
        return kRuntime;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  err << app.help();
  return kUsage;
}

}  // namespace vts::cli
