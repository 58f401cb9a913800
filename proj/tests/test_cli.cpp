#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "resest_cli/commands.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace resest::cli;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("resest_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("audit exit codes") {
  std::ostringstream out, err;
  CHECK(cmd_audit(testing_support::scenario_path("threeinertia.json"), out, err) == kOk);
  CHECK(out.str().find("all assumptions hold") != std::string::npos);
  CHECK(cmd_audit(testing_support::scenario_path("threeinertia_disconnected.json"), out, err) == kAuditFailure);
  CHECK(cmd_audit(testing_support::scenario_path("appendixB_item8_fail.json"), out, err) == kAuditFailure);
  CHECK(cmd_audit("/no/such/file.json", out, err) == kInputError);
}

TEST_CASE("median subcommand") {
  TempDir tmp;
  MedianOptions opt;
  opt.z = {1, 5, 2, 9, 4};
  opt.gamma = 3.0;
  opt.csv = tmp.path / "m.csv";
  std::ostringstream out, err;
  REQUIRE(cmd_median(opt, out, err) == kOk);
  CHECK(out.str().find("median set: [4, 4]") != std::string::npos);
  CHECK(out.str().find("PASS") != std::string::npos);
  std::ifstream f(*opt.csv);
  std::string header;
  std::getline(f, header);
  CHECK(header == "t,x_1,x_2,x_3,x_4,x_5,dist_to_median_set");

  MedianOptions bad;
  bad.s = {0, 0, 0};
  CHECK(cmd_median(bad, out, err) == kInputError);
  bad = {};
  CHECK(cmd_median(bad, out, err) == kInputError);
  bad.z = {1, 2};
  bad.topology = "torus";
  CHECK(cmd_median(bad, out, err) == kInputError);
  bad.topology = "ring";
  bad.x0 = {1, 2, 3};
  CHECK(cmd_median(bad, out, err) == kInputError);

  MedianOptions to_stdout;
  to_stdout.z = {0, 1, 2};
  to_stdout.horizon = 0.01;
  to_stdout.csv = "-";
  std::ostringstream o2;
  CHECK(cmd_median(to_stdout, o2, err) == kOk);
  CHECK(o2.str().find("t,x_1,x_2,x_3,dist_to_median_set") != std::string::npos);
}

TEST_CASE("simulate writes the log and the sidecar") {
  TempDir tmp;
  SimulateOptions opt;
  opt.scenario = testing_support::scenario_path("scalar_median.json");
  opt.out_dir = tmp.path;
  opt.horizon = 1.0;
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(opt, out, err) == kOk);
  CHECK(fs::exists(tmp.path / "scalar_median.csv"));
  const auto j = nlohmann::json::parse(std::ifstream(tmp.path / "scalar_median.json"));
  CHECK(j["seed"] == 7);
  CHECK(j["assumption_violating"] == false);

  opt.scenario = testing_support::scenario_path("threeinertia_disconnected.json");
  CHECK(cmd_simulate(opt, out, err) == kAuditFailure);
  opt.force = true;
  opt.horizon = 0.1;
  std::ostringstream forced;
  CHECK(cmd_simulate(opt, forced, err) == kOk);
  CHECK(forced.str().find("assumption-violating") != std::string::npos);

  SimulateOptions blow;
  blow.scenario = testing_support::scenario_path("threeinertia.json");
  blow.out_dir = tmp.path;
  blow.dt = 0.2;
  blow.horizon = 10.0;
  std::ostringstream berr;
  CHECK(cmd_simulate(blow, out, berr) == kNumericalFailure);
  CHECK(berr.str().find("last stable time") != std::string::npos);
}

TEST_CASE("bounds subcommand") {
  std::ostringstream out, err;
  BoundsOptions opt;
  opt.scenario = testing_support::scenario_path("scalar_lyapunov.json");
  opt.nbar = 5;
  opt.sbar = 0.5;
  REQUIRE(cmd_bounds(opt, out, err) == kOk);
  CHECK(out.str().find("gamma = 134.16") != std::string::npos);
  CHECK(out.str().find("kappa * gamma = 1\n") != std::string::npos);

  opt.scenario = testing_support::scenario_path("threeinertia.json");
  CHECK(cmd_bounds(opt, out, err) == kInputError);
}

TEST_CASE("sweep subcommand") {
  TempDir tmp;
  SweepOptions opt;
  opt.scenario = testing_support::scenario_path("scalar_median.json");
  opt.kappas = {1.0};
  opt.gammas = {1.0, 4.0};
  opt.eta = 10.0;
  opt.out_dir = tmp.path;
  opt.jobs = 2;
  std::ostringstream out, err;
  REQUIRE(cmd_sweep(opt, out, err) == kOk);
  CHECK(fs::exists(tmp.path / "scalar_median_sweep.csv"));
  CHECK(out.str().find("frontier") != std::string::npos);
}
