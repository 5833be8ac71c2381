/// @file test_cli.cpp
/// @brief Command-line application: validation errors and exit codes,
///        artifact layout, run-id linkage, determinism of outputs, config
///        file handling, and the subcommand smoke paths.

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "logspiral/app.hpp"

using namespace logspiral;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = app::run_app(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("logspiral_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json slurp_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("cli rejects invalid settings with exit code 2") {
  const auto dir = fresh_dir("invalid");
  auto r = cli({"--out-dir", dir.string(), "dirac", "--beta", "0", "--atoms", "1:0.0"});
  REQUIRE(r.code == 2);
  REQUIRE(r.err.find("beta") != std::string::npos);

  r = cli({"--out-dir", dir.string(), "dirac", "--atoms", "1:0.0;2:1.0"});
  REQUIRE(r.code == 2);

  // under-resolved mollifier names the guard
  r = cli({"--out-dir", dir.string(), "evolve", "--n", "256", "--ic",
           "mollified_dirac:patch,0.05,1:3.0"});
  REQUIRE(r.code == 2);
  REQUIRE(r.err.find("resolve") != std::string::npos);

  r = cli({"--out-dir", dir.string(), "kernel", "--no-such-flag"});
  REQUIRE(r.code == 2);

  r = cli({"--out-dir", dir.string()});  // missing subcommand
  REQUIRE(r.code == 2);
}

TEST_CASE("kernel run writes linked artifacts") {
  const auto dir = fresh_dir("kernel");
  const auto r = cli({"--out-dir", dir.string(), "kernel", "--beta", "1", "--n", "64"});
  REQUIRE(r.code == 0);

  const std::string csv = slurp(dir / "kernel.csv");
  REQUIRE(csv.rfind("# run_id=", 0) == 0);
  REQUIRE(csv.find("theta,K,Kp,Kpp") != std::string::npos);
  REQUIRE(line_count(csv) == 64 + 2);

  const auto summary = slurp_json(dir / "summary.json");
  REQUIRE(summary.at("jump").get<double>() == Catch::Approx(0.5).margin(1e-12));

  const auto manifest = slurp_json(dir / "manifest.json");
  REQUIRE(manifest.at("subcommand") == "kernel");
  REQUIRE(manifest.at("outcome") == "completed");
  const std::string run_id = manifest.at("run_id");
  REQUIRE(csv.find(run_id) != std::string::npos);
  REQUIRE(summary.at("run_id") == run_id);
  const auto files = manifest.at("files");
  REQUIRE(std::find(files.begin(), files.end(), "kernel.csv") != files.end());
  REQUIRE(std::find(files.begin(), files.end(), "summary.json") != files.end());
}

TEST_CASE("dirac run completes and samples the trajectory") {
  const auto dir = fresh_dir("dirac_ok");
  const auto r = cli({"--out-dir", dir.string(), "dirac", "--atoms", "1:0.0,0.5:2.0",
                      "--t-end", "1.0", "--n-samples", "20"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "trajectory.csv");
  REQUIRE(line_count(csv) == 1 + 1 + 21);  // comment, header, samples
  REQUIRE(csv.find("t,sum_intensity,I0,I1,theta0,theta1") != std::string::npos);
  const auto summary = slurp_json(dir / "summary.json");
  REQUIRE(summary.at("event_type") == "none");
}

TEST_CASE("dirac blow-up exits with the numerical event code") {
  const auto dir = fresh_dir("dirac_event");
  const auto r =
      cli({"--out-dir", dir.string(), "dirac", "--atoms", "-1:0.0", "--t-end", "5.0"});
  REQUIRE(r.code == 3);
  const auto summary = slurp_json(dir / "summary.json");
  const std::string ev = summary.at("event_type");
  REQUIRE((ev == "riccati_escape" || ev == "overflow"));
  const double Tstar = 2.0 * std::tanh(pi);
  REQUIRE(summary.at("fitted_Tstar").get<double>() == Catch::Approx(Tstar).epsilon(0.01));
  const auto manifest = slurp_json(dir / "manifest.json");
  REQUIRE(std::string(manifest.at("outcome")).rfind("event:", 0) == 0);
}

TEST_CASE("identical config and seed reproduce identical bytes") {
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  const std::vector<std::string> base{"dirac", "--atoms", "0.7:0.3,0.2:3.0",
                                      "--t-end", "0.8", "--n-samples", "50"};
  auto args1 = base, args2 = base;
  args1.insert(args1.begin(), {"--out-dir", dir1.string(), "--seed", "42"});
  args2.insert(args2.begin(), {"--out-dir", dir2.string(), "--seed", "42"});
  REQUIRE(cli(args1).code == 0);
  REQUIRE(cli(args2).code == 0);

  REQUIRE(slurp(dir1 / "trajectory.csv") == slurp(dir2 / "trajectory.csv"));
  REQUIRE(slurp(dir1 / "summary.json") == slurp(dir2 / "summary.json"));
  auto m1 = slurp_json(dir1 / "manifest.json");
  auto m2 = slurp_json(dir2 / "manifest.json");
  m1.erase("wall_time_s");
  m2.erase("wall_time_s");
  REQUIRE(m1.dump() == m2.dump());
}

TEST_CASE("evolve records diagnostics and final state") {
  const auto dir = fresh_dir("evolve");
  const auto r = cli({"--out-dir", dir.string(), "evolve", "--n", "64", "--ic", "cosine:0.5",
                      "--t-end", "0.5", "--record-every", "1"});
  REQUIRE(r.code == 0);
  const std::string diag = slurp(dir / "diagnostics.csv");
  REQUIRE(diag.find("t,intensity,dissipation,l1,l2,linf,l1_time_integral") != std::string::npos);
  REQUIRE(line_count(diag) > 4);
  REQUIRE(line_count(slurp(dir / "final_state.csv")) == 64 + 2);
}

TEST_CASE("evolve guard trip maps to the numerical event exit code") {
  const auto dir = fresh_dir("evolve_guard");
  const auto r = cli({"--out-dir", dir.string(), "evolve", "--n", "1024", "--ic",
                      "mollified_dirac:smooth_bump,0.12,-1:3.0", "--t-end", "3.0",
                      "--l1-guard", "1.2"});
  REQUIRE(r.code == 3);
  const auto manifest = slurp_json(dir / "manifest.json");
  REQUIRE(std::string(manifest.at("outcome")).rfind("blowup_suspected", 0) == 0);
}

TEST_CASE("reconstruct writes plane tables and binary grids") {
  const auto dir = fresh_dir("reconstruct_csv");
  auto r = cli({"--out-dir", dir.string(), "reconstruct", "--ic", "constant:0.8", "--n", "64",
                "--n-r", "8", "--n-theta", "16", "--fields", "omega,psi",
                "--circulation-radius", "2.0"});
  REQUIRE(r.code == 0);
  const std::string plane = slurp(dir / "plane.csv");
  REQUIRE(plane.find("r,theta,omega,psi") != std::string::npos);
  REQUIRE(line_count(plane) == 2 + 8 * 16);
  const auto circ = slurp_json(dir / "circulation.json");
  // R^2/2 * (2 pi c) with R = 2, c = 0.8
  REQUIRE(circ.at("circulation").get<double>() == Catch::Approx(4.0 * pi * 0.8).margin(1e-10));

  const auto dir2 = fresh_dir("reconstruct_bin");
  r = cli({"--out-dir", dir2.string(), "reconstruct", "--ic", "cosine:1.0", "--n", "64",
           "--n-r", "8", "--n-theta", "16", "--fields", "omega,u_r,u_theta", "--format",
           "binary", "--pressure", "--curve-atoms", "1:0.0"});
  REQUIRE(r.code == 0);
  REQUIRE(fs::file_size(dir2 / "grid.bin") == sizeof(double) * 3 * 8 * 16);
  const auto header = slurp_json(dir2 / "grid_header.json");
  REQUIRE(header.at("fields") == nlohmann::json({"omega", "u_r", "u_theta"}));
  REQUIRE(header.at("byte_order") == "little");
  REQUIRE(line_count(slurp(dir2 / "pressure.csv")) == 2 + 64);
  REQUIRE(line_count(slurp(dir2 / "curves.csv")) == 2 + 8);
}

TEST_CASE("evolved state feeds back through from_csv") {
  const auto dir = fresh_dir("roundtrip");
  REQUIRE(cli({"--out-dir", dir.string(), "evolve", "--n", "64", "--ic", "cosine:0.4",
               "--t-end", "0.2"})
              .code == 0);
  const auto dir2 = fresh_dir("roundtrip_rec");
  const auto r = cli({"--out-dir", dir2.string(), "reconstruct", "--n", "64", "--ic",
                      "from_csv:" + (dir / "final_state.csv").string(), "--n-r", "4",
                      "--n-theta", "16"});
  REQUIRE(r.code == 0);
}

TEST_CASE("selfsimilar run reports roots and flat-pitch parameters") {
  const auto dir = fresh_dir("selfsimilar");
  const auto r = cli({"--out-dir", dir.string(), "selfsimilar", "--beta", "1.0"});
  REQUIRE(r.code == 0);
  const auto summary = slurp_json(dir / "summary.json");
  REQUIRE(summary.at("prandtl_g").get<double>() ==
          Catch::Approx(std::tanh(pi)).margin(1e-12));
  // steep pitch: no interior two-sheet root
  REQUIRE(summary.at("root_count").get<int>() == 0);

  const auto dir2 = fresh_dir("selfsimilar_root");
  REQUIRE(cli({"--out-dir", dir2.string(), "selfsimilar", "--beta", "0.05"}).code == 0);
  const auto s2 = slurp_json(dir2 / "summary.json");
  REQUIRE(s2.at("root_count").get<int>() == 1);
  REQUIRE(line_count(slurp(dir2 / "roots.csv")) == 2 + 1);
}

TEST_CASE("sheetlimit study writes the error table and fitted rates") {
  const auto dir = fresh_dir("sheetlimit");
  const auto r = cli({"--out-dir", dir.string(), "sheetlimit", "--atoms", "0.8:1.2,-0.5:3.8",
                      "--eps-list", "0.2,0.1", "--t-end", "0.1", "--n-samples", "4"});
  REQUIRE(r.code == 0);
  REQUIRE(line_count(slurp(dir / "errors.csv")) == 2 + 2);
  const auto rates = slurp_json(dir / "rates.json");
  REQUIRE(rates.contains("q_I"));
  REQUIRE(rates.at("mass_defect_max").get<double>() < 1e-6);
}

TEST_CASE("config file supplies defaults and flags win") {
  const auto dir = fresh_dir("configfile");
  fs::create_directories(dir);
  const fs::path cfg = dir / "settings.ini";
  {
    std::ofstream f(cfg);
    f << "[kernel]\nbeta=2.0\nn=32\n";
  }
  const auto r = cli({"--out-dir", dir.string(), "--config", cfg.string(), "kernel",
                      "--beta", "3.0"});
  REQUIRE(r.code == 0);
  const auto manifest = slurp_json(dir / "manifest.json");
  REQUIRE(manifest.at("config").at("beta") == "3");
  REQUIRE(manifest.at("config").at("n") == "32");
}
