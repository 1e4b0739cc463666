#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = SINEDET_CLI_PATH;
const fs::path kTmp = SINEDET_TEST_TMPDIR;

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args, const std::string& tag) {
  fs::create_directories(kTmp);
  fs::path log = kTmp / (tag + ".log");
  std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  int code = -1;
  if (status != -1) code = WEXITSTATUS(status);
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {code, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = kTmp / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("det with the zero weight returns exactly one") {
  fs::path out = fresh_dir("det_none");
  RunResult r = run_cli("det --weight none --s 1 --out-dir " + out.string(), "det_none");
  CHECK(r.exit_code == 0);
  json res = json::parse(slurp(out / "result.json"));
  CHECK(res["det_real"].get<double>() == 1.0);
  CHECK(res["det_imag"].get<double>() == 0.0);
}

TEST_CASE("det run emits a determinant in (0,1) and a manifest") {
  fs::path out = fresh_dir("det_fermi");
  RunResult r =
      run_cli("det --weight fermi --alpha 1 --s 1 --out-dir " + out.string(), "det_fermi");
  CHECK(r.exit_code == 0);
  json res = json::parse(slurp(out / "result.json"));
  double det = res["det_real"].get<double>();
  CHECK(det > 0.0);
  CHECK(det < 1.0);

  json man = json::parse(slurp(out / "manifest.json"));
  CHECK(man["command"].get<std::string>() == "det");
  CHECK(man["parameters"]["weight"].get<std::string>() == "fermi");
  CHECK(man["parameters"]["s"].get<std::string>() == "1");
  CHECK(man.contains("wall_time_seconds"));
  CHECK(man["outputs"].size() >= 1);
}

TEST_CASE("surface CSV output is byte-identical across runs") {
  fs::path a = fresh_dir("surf_a");
  fs::path b = fresh_dir("surf_b");
  std::string args = "surface --profile fermi_factor --y-range -0.1:0.1:0.1 "
                     "--s-range 0.5:0.6:0.05 --out-dir ";
  CHECK(run_cli(args + a.string(), "surf_a").exit_code == 0);
  CHECK(run_cli(args + b.string(), "surf_b").exit_code == 0);
  std::string ca = slurp(a / "surface.csv");
  std::string cb = slurp(b / "surface.csv");
  REQUIRE(!ca.empty());
  CHECK(ca == cb);
  // header plus |y_grid| * |s_grid| rows
  long rows = std::count(ca.begin(), ca.end(), '\n');
  CHECK(rows == 1 + 3 * 3);
}

TEST_CASE("unknown flags are usage errors with exit code 2") {
  RunResult r = run_cli("det --weight fermi --no-such-flag 3", "bad_flag");
  CHECK(r.exit_code == 2);
  RunResult r2 = run_cli("frobnicate", "bad_cmd");
  CHECK(r2.exit_code == 2);
}

TEST_CASE("invalid parameter values are usage errors") {
  RunResult r = run_cli("det --weight fermi --alpha -1 --s 1", "bad_alpha");
  CHECK(r.exit_code == 2);
}

TEST_CASE("config file mirrors command-line flags") {
  fs::path out1 = fresh_dir("cfg_flags");
  fs::path out2 = fresh_dir("cfg_file");
  CHECK(run_cli("det --weight fermi --alpha 0.5 --s 2 --out-dir " + out1.string(),
                "cfg_flags")
            .exit_code == 0);

  fs::path cfg = kTmp / "det.cfg";
  {
    std::ofstream f(cfg);
    f << "weight = fermi\nalpha = 0.5\ns = 2\n";
  }
  CHECK(run_cli("det --config " + cfg.string() + " --out-dir " + out2.string(),
                "cfg_file")
            .exit_code == 0);

  json r1 = json::parse(slurp(out1 / "result.json"));
  json r2 = json::parse(slurp(out2 / "result.json"));
  CHECK(r1["log_det_real"].get<double>() == r2["log_det_real"].get<double>());
}

TEST_CASE("verify trace reports pass and fail through the exit code") {
  fs::path out = fresh_dir("verify_trace");
  RunResult ok = run_cli(
      "verify trace --weight fermi --alpha 1 --s 1 --tol 1e-6 --out-dir " + out.string(),
      "verify_ok");
  CHECK(ok.exit_code == 0);

  RunResult bad = run_cli(
      "verify trace --weight fermi --alpha 1 --s 1 --tol 1e-30 --out-dir " + out.string(),
      "verify_bad");
  CHECK(bad.exit_code == 1);
  // the failing residual is named on output
  CHECK(bad.output.find("residual") != std::string::npos);
}

TEST_CASE("classical subcommand writes the comparison table") {
  fs::path out = fresh_dir("classical");
  RunResult r = run_cli(
      "classical --ell 1 --s-max 1 --s-step 0.25 --out-dir " + out.string(), "classical");
  CHECK(r.exit_code == 0);
  std::string csv = slurp(out / "classical.csv");
  REQUIRE(!csv.empty());
  CHECK(csv.rfind("s,", 0) == 0);  // header starts with the s column
}

TEST_CASE("manifest records parameters faithfully for reruns") {
  fs::path out = fresh_dir("rerun");
  CHECK(run_cli("det --weight erf_window --alpha 2 --s 0.5 --out-dir " + out.string(),
                "rerun1")
            .exit_code == 0);
  json man = json::parse(slurp(out / "manifest.json"));
  std::string weight = man["parameters"]["weight"].get<std::string>();
  std::string alpha = man["parameters"]["alpha"].get<std::string>();
  std::string s = man["parameters"]["s"].get<std::string>();

  fs::path out2 = fresh_dir("rerun2");
  CHECK(run_cli("det --weight " + weight + " --alpha " + alpha + " --s " + s +
                    " --out-dir " + out2.string(),
                "rerun2")
            .exit_code == 0);
  CHECK(slurp(out / "result.json") == slurp(out2 / "result.json"));
}
