#include "doctest.h"

#include "vts/analysis.hpp"
#include "vts/cli.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace vts;
using namespace vts::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run vts_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string presets(const std::string& name) {
  const char* p = std::getenv("VTS_PRESETS");
  return (fs::path(p ? p : "presets") / name).string();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("vts-test-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::size_t count() const {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(path), fs::directory_iterator()));
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("quantities") {
  CHECK(parse_quantity("10ns", Quantity::kTime) == doctest::Approx(10e-9));
  CHECK(parse_quantity("496us", Quantity::kTime) == doctest::Approx(496e-6));
  CHECK(parse_quantity("2h", Quantity::kTime) == 7200.0);
  CHECK(parse_quantity("30cm", Quantity::kLength) == doctest::Approx(0.3));
  CHECK(parse_quantity("110kmh", Quantity::kSpeed) == doctest::Approx(110 / 3.6));
  CHECK(parse_quantity("110 km/h", Quantity::kSpeed) == doctest::Approx(110 / 3.6));
  CHECK_THROWS_AS(parse_quantity("10", Quantity::kTime), Error);
  CHECK_THROWS_AS(parse_quantity("10kg", Quantity::kTime), Error);
  CHECK_THROWS_AS(parse_quantity("fast", Quantity::kSpeed), Error);
}

TEST_CASE("calc subcommands") {
  auto r = vts_run({"calc", "ranging", "10ns"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("2.998 m") != std::string::npos);

  r = vts_run({"--format", "json", "calc", "relpos", "110kmh", "10ms"});
  CHECK(r.code == kOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(0.30555555555555555));
  CHECK(j["unit"] == "m");

  r = vts_run({"--format", "csv", "calc", "required-timing", "110kmh", "30cm"});
  CHECK(r.code == kOk);
  CHECK(r.out.rfind("calculation,value,unit\n", 0) == 0);
}

TEST_CASE("guard gain flags the quoted 45") {
  const auto r = vts_run({"--format", "json", "calc", "guard", "--slots", "2016", "--slot", "496us", "--delta", "10us"});
  REQUIRE(r.code == kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == 40.0);
  CHECK(j["note"].get<std::string>().find("45") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(vts_run({}).code == kUsage);
  CHECK(vts_run({"frobnicate"}).code == kUsage);
  CHECK(vts_run({"calc", "ranging"}).code == kUsage);
  CHECK(vts_run({"calc", "ranging", "10"}).code == kValidation);
  CHECK(vts_run({"--format", "yaml", "calc", "ranging", "10ns"}).code == kUsage);
  CHECK(vts_run({"--help"}).code == kOk);
}

TEST_CASE("missing or invalid scenario writes nothing") {
  TempDir dir("missing");
  auto r = vts_run({"--out", dir.path.string(), "availability", "/nonexistent/none.scn"});
  CHECK(r.code == kValidation);
  CHECK(r.err.find("none.scn") != std::string::npos);
  CHECK(dir.count() == 0);

  const auto bad = dir.path / "bad.scn";
  std::ofstream(bad) << "name: bad\nepoch_step_s: 0\n";
  r = vts_run({"--out", (dir.path / "out").string(), "availability", bad.string()});
  CHECK(r.code == kValidation);
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK(r.err.find("epoch_step_s") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "out"));
}

TEST_CASE("pps analyze reads a fixture") {
  TempDir dir("analyze");
  const auto csv = dir.path / "bench.csv";
  std::ofstream(csv) << "t_s,offset_ns\n0,10\n1,-10\n2,10\n3,-10\n";
  auto r = vts_run({"--format", "json", "pps", "analyze", csv.string()});
  REQUIRE(r.code == kOk);
  const auto j = nlohmann::json::parse(r.out);
  const auto& s = j["sessions"][0];
  CHECK(s["mean_ns"].get<double>() == 0.0);
  CHECK(s["rms_ns"].get<double>() == 10.0);

  std::ofstream(csv) << "t_s,offset_ns\n0,10\n1,x\n";
  r = vts_run({"pps", "analyze", csv.string()});
  CHECK(r.code == kValidation);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("pps simulate then analyze round trip") {
  TempDir dir("sim");
  auto r = vts_run({"--out", dir.path.string(), "--format", "json", "pps", "simulate", "--preset", "same-model",
                    "--hours", "6", "--seed", "5"});
  REQUIRE(r.code == kOk);
  const double sim_std = nlohmann::json::parse(r.out)["sessions"][0]["std_ns"].get<double>();
  REQUIRE(fs::exists(dir.path / "pps_same-model.csv"));
  r = vts_run({"--format", "json", "pps", "analyze", (dir.path / "pps_same-model.csv").string()});
  REQUIRE(r.code == kOk);
  CHECK(nlohmann::json::parse(r.out)["sessions"][0]["std_ns"].get<double>() == doctest::Approx(sim_std));
}

TEST_CASE("availability writes its artifacts") {
  TempDir dir("avail");
  auto r = vts_run({"--out", dir.path.string(), "--format", "json", "availability", presets("open-sky.scn"),
                    "--duration", "1h"});
  REQUIRE(r.code == kOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j == nlohmann::json::parse(slurp(dir.path / "availability.json")));
  CHECK(fs::exists(dir.path / "availability_epochs.csv"));
  // no temp files left behind
  for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}

TEST_CASE("seed override changes the sync result") {
  TempDir dir("sync");
  auto a = vts_run({"--out", dir.path.string(), "--format", "json", "sync", presets("sync-compare.scn"),
                    "--duration", "120s"});
  auto b = vts_run({"--out", dir.path.string(), "--format", "json", "sync", presets("sync-compare.scn"),
                    "--duration", "120s"});
  auto c = vts_run({"--out", dir.path.string(), "--format", "json", "sync", presets("sync-compare.scn"),
                    "--duration", "120s", "--seed", "43"});
  REQUIRE(a.code == kOk);
  REQUIRE(c.code == kOk);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(vts_run({"sync", presets("sync-compare.scn"), "--seed", "-4"}).code == kValidation);
}

TEST_CASE("output directory from the environment") {
  TempDir dir("env");
  ::setenv(kOutDirEnv, dir.path.string().c_str(), 1);
  const auto r = vts_run({"pps", "simulate", "--hours", "1"});
  ::unsetenv(kOutDirEnv);
  CHECK(r.code == kOk);
  CHECK(fs::exists(dir.path / "pps_stats.json"));
}
