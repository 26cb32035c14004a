#include "doctest.h"
#include "hybridoc/cli.hpp"
#include "hybridoc/io.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

using namespace hybridoc;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const char* env = std::getenv("HYBRIDOC_TEST_TMP");
  const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "hybridoc_cli_test";
  const fs::path dir = base / name;
  fs::remove_all(dir);
  return dir.string();
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hybridoc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

nlohmann::json json_file(const std::string& dir, const std::string& name) {
  return nlohmann::json::parse(read_file((fs::path(dir) / name).string()));
}

}  // namespace

TEST_CASE("simulate example2 with zero control crosses at a quarter period") {
  const std::string dir = scratch("sim2");
  const Run r = invoke({"simulate", "example2", "--u", "0", "--out", dir});
  REQUIRE(r.code == 0);
  const auto s = json_file(dir, "summary.json");
  REQUIRE(s["switch_times"].size() == 1);
  CHECK(std::abs(s["switch_times"][0].get<double>() - std::numbers::pi / 2) <= 1e-8);
  const std::string sw = read_file(dir + "/switches.csv");
  CHECK(sw.find("autonomous") != std::string::npos);
  // x(t_s−) ≈ (1, 0): second line holds time,kind,event,from,to,pre1,pre2,...
  std::istringstream lines(sw);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::vector<std::string> cols;
  std::stringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cols.push_back(c);
  REQUIRE(cols.size() >= 7);
  CHECK(std::stod(cols[5]) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(std::stod(cols[6])) <= 1e-8);
  CHECK(fs::exists(dir + "/manifest.json"));
  CHECK(fs::exists(dir + "/plot.gp"));
}

TEST_CASE("riccati on the scalar instance reproduces tanh") {
  const std::string dir = scratch("ric");
  const Run r = invoke({"riccati", "lq", "--no-switch", "--out", dir});
  REQUIRE(r.code == 0);
  CHECK(std::abs(json_file(dir, "summary.json")["K0"].get<double>() - std::tanh(1.0)) <= 1e-8);
  CHECK(fs::file_size(dir + "/riccati.csv") > 0);
}

TEST_CASE("identical runs give byte-identical artifacts") {
  const std::string a = scratch("rep_a");
  const std::string b = scratch("rep_b");
  REQUIRE(invoke({"simulate", "example1", "--u", "0.2", "--seed", "7", "--out", a}).code == 0);
  REQUIRE(invoke({"simulate", "example1", "--u", "0.2", "--seed", "7", "--out", b}).code == 0);
  for (const char* f : {"trajectory.csv", "switches.csv", "summary.json", "manifest.json"}) {
    CAPTURE(f);
    CHECK(read_file(a + "/" + f) == read_file(b + "/" + f));
  }
  // The manifest hash follows the configuration.
  const std::string c = scratch("rep_c");
  REQUIRE(invoke({"simulate", "example1", "--u", "0.2", "--seed", "8", "--out", c}).code == 0);
  CHECK(json_file(a, "manifest.json")["config_hash"] != json_file(c, "manifest.json")["config_hash"]);
  const auto m = json_file(a, "manifest.json");
  for (const auto& f : m["files"]) {
    const std::string body = read_file(a + "/" + f["name"].get<std::string>());
    CHECK(f["fnv1a"].get<std::string>() == hex64(fnv1a(body)));
  }
}

TEST_CASE("exit codes separate config errors from solver failures") {
  const std::string dir = scratch("codes");
  CHECK(invoke({"simulate", "nope", "--out", dir}).code == kExitConfigError);
  CHECK(invoke({"simulate", "example1", "--bogus", "--out", dir}).code == kExitConfigError);
  CHECK(invoke({"hdp", "example1", "--grid", "0.1", "--out", dir}).code == kExitConfigError);
  CHECK(invoke({"hdp", "example1", "--box", "0,1,2", "--out", dir}).code == kExitConfigError);
  CHECK(invoke({"simulate", "example1", "--u", "9", "--out", dir}).code == kExitConfigError);
  CHECK(invoke({"riccati", "example1", "--out", dir}).code == kExitConfigError);
  CHECK(invoke({"simulate", dir + "/missing.json", "--out", dir}).code == kExitConfigError);
  const Run r = invoke({"hmp", "example1", "--tol", "1e-30", "--out", dir});
  CHECK(r.code == kExitSolverFailure);
  CHECK(!r.err.empty());
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("hmp enumerates event sequences and keeps the cheapest") {
  const std::string dir = scratch("enum");
  const Run r = invoke({"hmp", "example1", "--enumerate", "--out", dir});
  REQUIRE(r.code == 0);
  const auto seqs = nlohmann::json::parse(read_file(dir + "/sequences.json"));
  CHECK(seqs.size() == 2);
  const auto s = json_file(dir, "summary.json");
  CHECK(s["switches"].size() == 1);
  CHECK(s["cost"].get<double>() < seqs[0]["cost"].get<double>());
}

TEST_CASE("hdp writes readable binary grids") {
  const std::string dir = scratch("hdp");
  REQUIRE(invoke({"hdp", "example1", "--grid", "0.05,0.05", "--out", dir}).code == 0);
  const ValueGridFile f = read_value_grid_binary(read_file(dir + "/value_0.bin"));
  CHECK(f.axes.size() == 1);
  CHECK(f.slices == 21);
  CHECK(f.remaining == 1);
  CHECK(json_file(dir, "summary.json")["stages"] == 2);
}

TEST_CASE("verify example1 passes its gates") {
  const std::string dir = scratch("verify");
  const Run r = invoke({"verify", "example1", "--out", dir});
  CHECK(r.code == 0);
  const auto rep = json_file(dir, "report.json");
  CHECK(rep["max_relative"].get<double>() <= 2e-2);
  CHECK(rep["max_hamiltonian_gap"].get<double>() <= 1e-6);
  CHECK(rep["sensitivity_relative_error"].get<double>() <= 1e-3);
  CHECK(rep["passed"] == true);
}

TEST_CASE("a JSON problem file runs through the same commands") {
  const std::string dir = scratch("cfg");
  fs::create_directories(dir);
  const std::string path = dir + "/decay.json";
  write_file(path, R"({
    "tf": 1,
    "locations": [{"name": "only", "state_dim": 1, "control": {"lower": [-2], "upper": [2]},
                   "field": [[{"c": 1, "u": [1]}]],
                   "running": [{"c": 0.5, "x": [2]}, {"c": 0.5, "u": [2]}]}],
    "initial": {"location": "only", "x": [1]}
  })");
  const Run r = invoke({"hmp", path, "--out", dir});
  REQUIRE(r.code == 0);
  // ẋ = u with ½(x² + u²): λ(0) = tanh(1)·x0.
  CHECK(json_file(dir, "summary.json")["lambda0"][0].get<double>() == doctest::Approx(std::tanh(1.0)).epsilon(1e-6));
}

TEST_CASE("oracle subcommand finds nothing cheaper than the extremal") {
  const std::string dir = scratch("oracle");
  const Run r = invoke({"oracle", "example1", "--out", dir});
  REQUIRE(r.code == 0);
  const auto o = json_file(dir, "oracle.json");
  CHECK(o["oracle_min"].get<double>() >= o["extremal_cost"].get<double>() - 1e-9);
  CHECK(o["probe"]["min_increase"].get<double>() >= -1e-8);
}
