#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "cazp/basin_transport.hpp"
#include "cazp/common.hpp"
#include "cazp/matching.hpp"
#include "cazp/runner.hpp"

using namespace cazp;
using namespace cazp::cli;
using nlohmann::json;

namespace {

const double kMinWindow = 4.0 * std::sqrt(M_PI);

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json manifest_of(const std::string& dir) {
  return json::parse(slurp(dir + "/manifest.json"));
}

int run_binary(const std::string& args) {
  const int rc = std::system((std::string(CAZPLAB_BIN) + " " + args).c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

ExperimentConfig small_config(std::uint64_t seed, int trials,
                              const std::string& out) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.window_halfwidth = 7.09;
  cfg.output_dir = out;
  return cfg;
}

int lines_of(const std::string& text) {
  int n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("config validation rejects each bad field by name") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
  CHECK(effective_window(cfg) == doctest::Approx(8.0 * std::sqrt(M_PI)));
  cfg.window_halfwidth = 7.2;
  CHECK(effective_window(cfg) == 7.2);

  auto expect_reject = [](auto&& tweak, const std::string& word) {
    ExperimentConfig c;
    tweak(c);
    try {
      validate_config(c);
      FAIL_CHECK("expected rejection mentioning " << word);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(word) != std::string::npos);
    }
  };
  expect_reject([](auto& c) { c.trials = 0; }, "trials");
  expect_reject([](auto& c) { c.jobs = 0; }, "jobs");
  expect_reject([](auto& c) { c.window_halfwidth = kMinWindow - 1e-3; },
                "window_halfwidth");
  expect_reject([](auto& c) { c.grid_spacing = 0.0; }, "grid_spacing");
  expect_reject([](auto& c) { c.const_c = -1.0; }, "const_c");
  expect_reject([](auto& c) { c.rho_threshold = 0.0; }, "rho_threshold");
  expect_reject([](auto& c) { c.kernel_radius = 0.0; }, "kernel_radius");
  expect_reject([](auto& c) { c.truncation_tol = 2.0; }, "truncation_tol");
}

TEST_CASE("config files load flat key=value pairs with line-precise errors") {
  const std::string path = "/tmp/cazp_cli_config.txt";
  {
    std::ofstream out(path);
    out << "# experiment defaults\n";
    out << "seed = 9\n";
    out << "trials=3\n";
    out << "window_halfwidth = 7.5\n";
    out << "const_c = 2.25   # inline comment\n";
    out << "output_dir = /tmp/cazp_cli_cfgout\n";
  }
  const ExperimentConfig cfg = load_config_file(path, ExperimentConfig{});
  CHECK(cfg.seed == 9);
  CHECK(cfg.trials == 3);
  CHECK(cfg.window_halfwidth == 7.5);
  CHECK(cfg.const_c == 2.25);
  CHECK(cfg.output_dir == "/tmp/cazp_cli_cfgout");
  CHECK(cfg.grid_spacing == 0.1);  // untouched default

  {
    std::ofstream out(path);
    out << "seed = 1\n";
    out << "bogus = 1\n";
  }
  try {
    load_config_file(path, ExperimentConfig{});
    FAIL_CHECK("unknown key must be rejected");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":2") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
  {
    std::ofstream out(path);
    out << "trials = horse\n";
  }
  CHECK_THROWS_AS(load_config_file(path, ExperimentConfig{}), ConfigError);
  {
    std::ofstream out(path);
    out << "no equals sign here\n";
  }
  CHECK_THROWS_AS(load_config_file(path, ExperimentConfig{}), ConfigError);
  CHECK_THROWS_AS(load_config_file("/tmp/cazp_cli_missing.txt",
                                   ExperimentConfig{}),
                  ConfigError);

  ExperimentConfig direct;
  CHECK_THROWS_AS(set_config_key(direct, "seed", "12x", "cli"), ConfigError);
  set_config_key(direct, "rho_threshold", "4.5", "cli");
  CHECK(direct.rho_threshold == 4.5);
}

TEST_CASE("sample runs are deterministic across reruns and worker counts") {
  const ExperimentConfig a = small_config(42, 2, "/tmp/cazp_cli_s1");
  REQUIRE(run("sample", a) == 0);
  ExperimentConfig b = small_config(42, 2, "/tmp/cazp_cli_s2");
  b.jobs = 3;
  REQUIRE(run("sample", b) == 0);
  const std::string csv1 = slurp("/tmp/cazp_cli_s1/zeros.csv");
  CHECK(csv1 == slurp("/tmp/cazp_cli_s2/zeros.csv"));
  CHECK(csv1.rfind("trial,zero_re,zero_im\n", 0) == 0);

  // intensity 1/pi over the disk: mean count per trial is window^2
  const int rows = lines_of(csv1) - 1;
  CHECK(rows > 60);
  CHECK(rows < 140);
  CHECK(csv1.find("\n1,") != std::string::npos);  // second trial present

  const json m = manifest_of("/tmp/cazp_cli_s1");
  CHECK(m["artifact_version"] == kArtifactVersion);
  CHECK(m["experiment"] == "sample");
  CHECK(m["status"] == "ok");
  CHECK(m["exit_code"] == 0);
  CHECK(m["config"]["seed"] == 42);
  CHECK(m["config"]["trials"] == 2);
  CHECK(m["config"]["window_halfwidth"] == 7.09);
  CHECK(m["wall_seconds"].get<double>() > 0.0);
  REQUIRE(m["files"].size() == 1);
  CHECK(m["files"][0]["name"] == "zeros.csv");
  CHECK(m["files"][0]["bytes"].get<std::size_t>() == csv1.size());
  CHECK(m["files"][0]["fnv1a64"].get<std::string>().size() == 16);
  CHECK(m["summary"]["zeros_total"].get<int>() == rows);

  // same config into both directories: the manifests hash identical bytes
  CHECK(m["files"][0]["fnv1a64"] ==
        manifest_of("/tmp/cazp_cli_s2")["files"][0]["fnv1a64"]);
}

TEST_CASE("verify passes on a calibrated floor and fails an undersized one") {
  ExperimentConfig cfg = small_config(7, 1, "/tmp/cazp_cli_v1");
  cfg.window_halfwidth = 0.0;  // verify sizes its own grids
  cfg.const_c = 1.0;
  REQUIRE(run("verify", cfg) == 0);
  const std::string csv = slurp("/tmp/cazp_cli_v1/verify.csv");
  CHECK(lines_of(csv) == 11);
  CHECK(csv.rfind("trial,set_index,shape,hall_pass,", 0) == 0);
  CHECK(csv.find("disk") != std::string::npos);
  CHECK(csv.find("rect") != std::string::npos);
  CHECK(csv.find("union") != std::string::npos);
  const json m = manifest_of("/tmp/cazp_cli_v1");
  CHECK(m["summary"]["pass_fraction"] == 1.0);
  CHECK(m["summary"]["sets_total"] == 10);

  cfg.const_c = 0.25;
  cfg.output_dir = "/tmp/cazp_cli_v0";
  CHECK(run("verify", cfg) == 3);
  const json bad = manifest_of("/tmp/cazp_cli_v0");
  CHECK(bad["summary"]["pass_fraction"].get<double>() < 1.0);
  CHECK(bad["status"] == "failed");
}

TEST_CASE("calibrate stops at the smallest passing floor constant") {
  ExperimentConfig cfg = small_config(7, 1, "/tmp/cazp_cli_cal");
  cfg.window_halfwidth = 0.0;
  REQUIRE(run("calibrate", cfg) == 0);
  const std::string csv = slurp("/tmp/cazp_cli_cal/calibrate.csv");
  CHECK(csv == "const_c,trials,sets,pass_fraction\n4,1,6,1\n");
  CHECK(manifest_of("/tmp/cazp_cli_cal")["summary"]["calibrated_const_c"] == 4.0);
}

TEST_CASE("match emits interior displacements and a tails stub when thin") {
  const ExperimentConfig cfg = small_config(5, 1, "/tmp/cazp_cli_m1");
  REQUIRE(run("match", cfg) == 0);
  const std::vector<DisplacementRow> rows =
      read_displacements_csv("/tmp/cazp_cli_m1/displacements.csv");
  REQUIRE(!rows.empty());
  bool hall = false, mincost = false;
  for (const DisplacementRow& r : rows) {
    CHECK(r.trial == 0);
    CHECK(r.abs_xi == doctest::Approx(std::hypot(r.xi_re, r.xi_im)));
    if (r.matcher == "hall") hall = true;
    if (r.matcher == "mincost") mincost = true;
  }
  CHECK(hall);
  CHECK(mincost);
  // far fewer than 1000 interior rows: fits are skipped, header remains
  CHECK(slurp("/tmp/cazp_cli_m1/tails.csv") ==
        "statistic,lambda,survival,fit_rate,fit_prefactor,fit_r2\n");
  const json m = manifest_of("/tmp/cazp_cli_m1");
  CHECK(m["summary"]["interior_rows_hall"].get<int>() > 0);
  REQUIRE(m["files"].size() == 2);
}

TEST_CASE("a failed trial flushes a FAILED marker row and exits numerically") {
  ExperimentConfig cfg = small_config(5, 2, "/tmp/cazp_cli_mf");
  cfg.rho_threshold = 0.05;  // no admissible edges: imperfect matching
  CHECK(run("match", cfg) == 4);
  const std::string csv = slurp("/tmp/cazp_cli_mf/displacements.csv");
  CHECK(csv.find("FAILED,") != std::string::npos);
  CHECK(csv.find("imperfect matching") != std::string::npos);
  const json m = manifest_of("/tmp/cazp_cli_mf");
  CHECK(m["status"] == "failed");
  CHECK(m["exit_code"] == 4);
  CHECK(m["summary"]["error"].get<std::string>().find("imperfect") !=
        std::string::npos);
}

TEST_CASE("basins aggregates per-zero rows over the window") {
  ExperimentConfig cfg = small_config(5, 1, "/tmp/cazp_cli_b1");
  cfg.grid_spacing = 0.3;
  REQUIRE(run("basins", cfg) == 0);
  const std::vector<BasinRow> rows =
      read_basins_csv("/tmp/cazp_cli_b1/basins.csv");
  REQUIRE(rows.size() > 30);
  double total_area = 0.0;
  for (const BasinRow& r : rows) {
    CHECK(r.trial == 0);
    CHECK(r.area > 0.0);
    total_area += r.area;
  }
  const json m = manifest_of("/tmp/cazp_cli_b1");
  const double window_area = 4.0 * 7.09 * 7.09;
  const double unaccounted =
      0.3 * 0.3 * (m["summary"]["escaped_cells"].get<double>() +
                   m["summary"]["unresolved_cells"].get<double>());
  // the grid rounds up to cover the window, so cell accounting can only
  // exceed the window area, and by less than one cell ring
  const double covered = total_area + unaccounted;
  CHECK(covered >= window_area - 1e-9);
  CHECK(covered <= window_area * 1.1);
  CHECK(std::abs(covered / (0.3 * 0.3) -
                 std::round(covered / (0.3 * 0.3))) < 1e-6);
  CHECK(m["summary"]["unresolved_cells"].get<int>() == 0);
}

TEST_CASE("the binary maps parse, config and run errors to exit codes") {
  CHECK(run_binary("--help >/dev/null 2>&1") == 0);
  CHECK(run_binary("bogus-subcommand >/dev/null 2>&1") == 2);
  CHECK(run_binary("sample --trials 0 --out /tmp/cazp_cli_x >/dev/null 2>&1") ==
        2);
  CHECK(run_binary("sample --window 3 --out /tmp/cazp_cli_x >/dev/null 2>&1") ==
        2);

  {
    std::ofstream out("/tmp/cazp_cli_proc.txt");
    out << "seed = 9\n";
    out << "trials = 3\n";
    out << "window_halfwidth = 7.09\n";
  }
  // flag overrides file, file overrides default
  CHECK(run_binary("sample --config /tmp/cazp_cli_proc.txt --trials 1 "
                   "--out /tmp/cazp_cli_p1 >/dev/null 2>&1") == 0);
  const json m = manifest_of("/tmp/cazp_cli_p1");
  CHECK(m["config"]["seed"] == 9);
  CHECK(m["config"]["trials"] == 1);
  CHECK(m["config"]["window_halfwidth"] == 7.09);

  CHECK(run_binary("sample --config /tmp/cazp_cli_missing.txt "
                   ">/dev/null 2>&1") == 2);
}

TEST_CASE("the output directory falls back to the environment default") {
  REQUIRE(setenv(kOutputDirEnvVar, "/tmp/cazp_cli_envdir", 1) == 0);
  ExperimentConfig cfg = small_config(1, 1, "");
  CHECK(run("sample", cfg) == 0);
  REQUIRE(unsetenv(kOutputDirEnvVar) == 0);
  CHECK(manifest_of("/tmp/cazp_cli_envdir")["files"][0]["name"] == "zeros.csv");
}
