#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hamsys_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(HAMSYS_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

fs::path free_input() {
  const fs::path p = workdir() / "H0.json";
  put(p, R"({"ell": 3.141592653589793, "segments": [{"r0": 0, "r1": 3.141592653589793, "h": [[1, 0], [0, 1]]}]})");
  return p;
}

}  // namespace

TEST_CASE("forward on H0 gives integer atoms of mass 1") {
  const fs::path out = workdir() / "fwd";
  REQUIRE(run("forward --in " + free_input().string() + " --window 50 --out-dir " + out.string()) == 0);
  const json mu = json::parse(slurp(out / "measure.json"));
  CHECK(mu["atoms"].size() == 101);
  for (const auto& a : mu["atoms"]) {
    const double t = a["t"].get<double>();
    CHECK(std::abs(t - std::round(t)) < 1e-12);
    CHECK(std::abs(a["mass"].get<double>() - 1.0) < 1e-12);
  }
  CHECK(slurp(out / "measure.csv").rfind("t,mass\n", 0) == 0);
  CHECK(fs::exists(out / "diagnostics.json"));
}

TEST_CASE("inverse on the free measure gives the identity") {
  const fs::path fwd = workdir() / "fwd2";
  REQUIRE(run("forward --in " + free_input().string() + " --window 100 --out-dir " + fwd.string()) == 0);
  const fs::path out = workdir() / "inv";
  REQUIRE(run("inverse --in " + (fwd / "measure.json").string() + " --c 0 --out-dir " + out.string()) == 0);
  const json h = json::parse(slurp(out / "hamiltonian.json"));
  CHECK(std::abs(h["ell"].get<double>() - M_PI) < 1e-8);
  for (const auto& s : h["segments"]) {
    CHECK(std::abs(s["h"][0][0].get<double>() - 1.0) < 5e-3);
    CHECK(std::abs(s["h"][0][1].get<double>()) < 5e-3);
    CHECK(std::abs(s["h"][1][1].get<double>() - 1.0) < 5e-3);
  }
  CHECK(slurp(out / "hamiltonian.csv").rfind("r,h11,h12,h22\n", 0) == 0);
  const json d = json::parse(slurp(out / "diagnostics.json"));
  CHECK(d.contains("invariants"));
}

TEST_CASE("outputs are reproducible") {
  const fs::path a = workdir() / "rep_a", b = workdir() / "rep_b";
  REQUIRE(run("forward --in " + free_input().string() + " --window 30 --out-dir " + a.string()) == 0);
  REQUIRE(run("forward --in " + free_input().string() + " --window 30 --out-dir " + b.string()) == 0);
  CHECK(slurp(a / "measure.json") == slurp(b / "measure.json"));
  CHECK(slurp(a / "measure.csv") == slurp(b / "measure.csv"));
}

TEST_CASE("validation errors exit 2") {
  const fs::path out = workdir() / "v";
  CHECK(run("example-nonpw --h 0.2 --out-dir " + out.string()) == 2);
  CHECK(run("forward --in " + (workdir() / "missing.json").string() + " --out-dir " + out.string()) == 2);
  const fs::path bad = workdir() / "bad_psd.json";
  put(bad, R"({"ell": 1, "segments": [{"r0": 0, "r1": 1, "h": [[1, 1.1], [1.1, 1]]}]})");
  CHECK(run("forward --in " + bad.string() + " --out-dir " + out.string()) == 2);
  CHECK(run("forward --in " + free_input().string() + " --window -1 --out-dir " + out.string()) == 2);
  CHECK(run("nosuchcommand") == 2);
}

TEST_CASE("outputs never overwrite the input") {
  const fs::path dir = workdir() / "same";
  fs::create_directories(dir);
  const fs::path in = dir / "measure.json";
  put(in, R"({"window": 10, "b": 0, "c": 0, "atoms": [{"t": 0, "mass": 1}]})");
  const std::string before = slurp(in);
  CHECK(run("forward --in " + in.string() + " --out-dir " + dir.string()) == 2);
  CHECK(slurp(in) == before);
}

TEST_CASE("numerical failure exits 3") {
  // masses vanish near 0: T_{mu,s} is nearly singular on PW_pi
  json mu = {{"window", 100.0}, {"b", 0.0}, {"c", 0.0}, {"atoms", json::array()}};
  for (int k = -100; k <= 100; ++k) mu["atoms"].push_back({{"t", k}, {"mass", std::abs(k) <= 10 ? 1e-12 : 1.0}});
  const fs::path in = workdir() / "degenerate.json";
  put(in, mu.dump());
  CHECK(run("inverse --in " + in.string() + " --out-dir " + (workdir() / "deg").string()) == 3);
}

TEST_CASE("invariant breach exits 4") {
  const fs::path out = workdir() / "np";
  CHECK(run("example-nonpw --h 0.1 --kmax 6 --out-dir " + out.string()) == 0);
  CHECK(run("example-nonpw --h 0.1 --kmax 6 --tol-override 1e-30 --out-dir " + out.string()) == 4);
  const json rep = json::parse(slurp(out / "nonpw.json"));
  CHECK(rep["rows"].size() == 3);
}

TEST_CASE("framebounds, roundtrip and check-diag run") {
  const fs::path rt = workdir() / "rt";
  CHECK(run("roundtrip --in " + free_input().string() + " --window 60 --s-samples 33 --r-samples 65 --out-dir " +
            rt.string()) == 0);
  CHECK(fs::exists(rt / "report.json"));
  CHECK(fs::exists(rt / "residuals.csv"));
  const fs::path fb = workdir() / "fb";
  CHECK(run("framebounds --in " + (rt / "measure.json").string() + " --pw-trunc 64 --out-dir " + fb.string()) == 0);
  const json b = json::parse(slurp(fb / "framebounds.json"));
  CHECK(std::abs(b.back()["lambda_min"].get<double>() - 1.0) < 1e-8);
  const fs::path cd = workdir() / "cd";
  CHECK(run("check-diag --out-dir " + cd.string()) == 0);
  CHECK(fs::exists(cd / "check_diag.csv"));
}
