// End-to-end checks of the command line front end: exit codes, determinism,
// and the effective-config round trip. Each case shells out to the built
// binary (path injected by CMake).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "recbayes/data_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = RB_CLI_PATH;

fs::path scratch_root() {
  const auto dir = fs::temp_directory_path() / "recbayes_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) { return rb::io::read_text_file(path.string()); }

}  // namespace

TEST_CASE("exit codes") {
  const auto dir = scratch_root() / "exit";
  fs::create_directories(dir);

  SUBCASE("missing subcommand or config is a usage error (2)") {
    CHECK(run("") == 2);
    CHECK(run("fit") == 2);
  }
  SUBCASE("invalid model/mode combination is a config error (2)") {
    write_file(dir / "bad.json", R"({"model":"geostat","mode":"online"})");
    CHECK(run("fit --config " + (dir / "bad.json").string()) == 2);
  }
  SUBCASE("unparseable config is a config error (2)") {
    write_file(dir / "broken.json", "{nope");
    CHECK(run("fit --config " + (dir / "broken.json").string()) == 2);
  }
  SUBCASE("unreadable data file is a data error (3)") {
    write_file(dir / "nodata.json",
               R"({"model":"geostat","mode":"full","data":"/nonexistent.csv",)"
               R"("stage":{"iterations":100,"burn_in":10}})");
    CHECK(run("fit --config " + (dir / "nodata.json").string()) == 3);
  }
  SUBCASE("malformed data values are a data error (3)") {
    write_file(dir / "bad.csv", "value\n0\n7\n");
    write_file(dir / "baddata.json",
               R"({"model":"beta-bernoulli","mode":"full","data":")" +
                   (dir / "bad.csv").string() + R"("})");
    CHECK(run("fit --config " + (dir / "baddata.json").string()) == 3);
  }
}

TEST_CASE("generate is deterministic at fixed seed") {
  const auto dir = scratch_root() / "gen";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "g.json",
             R"({"model":"geostat","mode":"full","synthetic":{"n":24},)"
             R"("stage":{"seed":9},"out":")" + (dir / "a").string() + R"("})");
  REQUIRE(run("generate --config " + (dir / "g.json").string()) == 0);
  REQUIRE(run("generate --config " + (dir / "g.json").string() + " --out " +
              (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "geostat.csv") == slurp(dir / "b" / "geostat.csv"));
  CHECK(slurp(dir / "a" / "truth.json") == slurp(dir / "b" / "truth.json"));
  // different seed, different data
  REQUIRE(run("generate --config " + (dir / "g.json").string() + " --seed 10 --out " +
              (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "geostat.csv") != slurp(dir / "c" / "geostat.csv"));
}

TEST_CASE("poisson generator leaves exactly one missing year") {
  const auto dir = scratch_root() / "poigen";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "p.json",
             R"({"model":"poisson-dyn","mode":"full","synthetic":{"T":36,"S":2},)"
             R"("stage":{"seed":3},"out":")" + (dir / "out").string() + R"("})");
  REQUIRE(run("generate --config " + (dir / "p.json").string()) == 0);
  const auto data = rb::io::read_count_csv((dir / "out" / "poisson-dyn.csv").string());
  REQUIRE(data.counts.size() == 2);
  for (const auto& site : data.counts) {
    CHECK(site.size() == 38);
    int missing = 0;
    for (const auto& y : site) missing += y ? 0 : 1;
    CHECK(missing == 1);
    CHECK_FALSE(site[36].has_value());
  }
}

TEST_CASE("fit reproduces the paper-style beta recursion and the effective config round-trips") {
  const auto dir = scratch_root() / "bb";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "bb.json", R"({
    "model": "beta-bernoulli", "mode": "prior-rb",
    "synthetic": {"values": [0,1,1,1,0,0,0,1]},
    "partition": {"assignment": "provided", "blocks": [[0,1],[2,3],[4,5],[6,7]]},
    "out": ")" + (dir / "run1").string() + R"("
  })");
  REQUIRE(run("fit --config " + (dir / "bb.json").string()) == 0);
  const auto report = slurp(dir / "run1" / "report.json");
  CHECK(report.find("\"a\": 2.0") != std::string::npos);
  CHECK(report.find("\"a\": 5.0") != std::string::npos);

  // re-feeding the effective config reproduces the run byte-for-byte
  REQUIRE(run("fit --config " + (dir / "run1" / "effective_config.json").string() + " --out " +
              (dir / "run2").string()) == 0);
  CHECK(slurp(dir / "run1" / "beta-bernoulli.csv") == slurp(dir / "run2" / "beta-bernoulli.csv"));
}

TEST_CASE("geostat fit + compare pipeline") {
  const auto dir = scratch_root() / "geo";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string base = R"({
    "model": "geostat", "mode": "MODE",
    "data": "DATA",
    "stage": {"iterations": 1500, "burn_in": 300, "seed": 21, "workers": 2},
    "partition": {"J": 2, "assignment": "random"},
    "out": "OUT"
  })";
  // one dataset shared by both runs
  write_file(dir / "gen.json",
             R"({"model":"geostat","mode":"full","synthetic":{"n":30},)"
             R"("stage":{"seed":2},"out":")" + (dir / "data").string() + R"("})");
  REQUIRE(run("generate --config " + (dir / "gen.json").string()) == 0);
  const std::string data = (dir / "data" / "geostat.csv").string();

  auto fill = [&](std::string mode, std::string out) {
    std::string s = base;
    s.replace(s.find("MODE"), 4, mode);
    s.replace(s.find("DATA"), 4, data);
    s.replace(s.find("OUT"), 3, (dir / out).string());
    return s;
  };
  write_file(dir / "full.json", fill("full", "full"));
  write_file(dir / "pprb.json", fill("pprb", "pprb"));
  REQUIRE(run("fit --config " + (dir / "full.json").string()) == 0);
  REQUIRE(run("fit --config " + (dir / "pprb.json").string()) == 0);
  CHECK(fs::exists(dir / "pprb" / "samples_stage2.csv"));

  // compare runs and writes both report formats
  REQUIRE(run("compare " + (dir / "full" / "samples_full.csv").string() + " " +
              (dir / "pprb" / "samples_stage2.csv").string() + " --out " +
              (dir / "cmp").string()) == 0);
  CHECK(fs::exists(dir / "cmp" / "comparison.json"));
  CHECK(fs::exists(dir / "cmp" / "comparison.csv"));
  // mismatched parameter sets are a config error
  CHECK(run("compare " + (dir / "full" / "samples_full.csv").string() + " " +
            (dir / "data" / "geostat.csv").string() + " --out " + (dir / "cmp2").string()) == 2);
}

TEST_CASE("bench smoke: trivial sizes complete quickly") {
  const auto dir = scratch_root() / "bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "b.json", R"({
    "model": "geostat", "mode": "full",
    "bench": {"sizes": [10, 16]},
    "stage": {"iterations": 300, "burn_in": 100, "seed": 5},
    "partition": {"J": 2, "assignment": "random"},
    "out": ")" + (dir / "out").string() + R"("
  })");
  REQUIRE(run("bench --config " + (dir / "b.json").string()) == 0);
  const auto csv = slurp(dir / "out" / "bench.csv");
  CHECK(csv.find("n,full_ms,recursive_ms,ratio") != std::string::npos);
  CHECK(csv.find("\n10,") != std::string::npos);
}
