#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "support.hpp"

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with `args`; stderr is discarded unless redirected in `args`.
Run run(const std::string& args) {
  const std::string cmd = std::string(BORNLAB_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("help output matches the golden files") {
  CHECK(run("--help").out == testing::read_file(std::filesystem::path(BORNLAB_GOLDEN_DIR) / "bornlab.txt"));
  for (const char* sub : {"density", "moments", "bound", "sample", "verify", "replicate", "sweep",
                          "madelung", "trajectories"}) {
    CAPTURE(sub);
    const Run r = run(std::string(sub) + " --help");
    CHECK(r.status == 0);
    CHECK(r.out == testing::read_file(std::filesystem::path(BORNLAB_GOLDEN_DIR) / (std::string(sub) + ".txt")));
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").status == 2);
  CHECK(run("density --bogus").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("replicate --config /nonexistent/lab.json").status == 2);
  CHECK(run("sample --out -").status == 2);  // --n is required
  testing::TempDir dir;
  testing::write_file(dir / "bad.json", R"({"geometry": {"w_mm": 1}})");
  CHECK(run("moments --config " + q(dir / "bad.json")).status == 2);
}

TEST_CASE("density: three points") {
  testing::TempDir dir;
  testing::write_file(dir / "c.json", R"({"geometry": {"I0": 2.5}})");
  const Run r = run("density --points 3 --out - --config " + q(dir / "c.json"));
  REQUIRE(r.status == 0);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "t_mm,intensity");
  CHECK(rows[1].rfind("-1,", 0) == 0);
  CHECK(rows[2] == "0,2.5");
  CHECK(rows[3].rfind("1,", 0) == 0);
}

TEST_CASE("density: ten thousand points within a second") {
  testing::TempDir dir;
  const auto start = std::chrono::steady_clock::now();
  const Run r = run("density --points 10000 --out " + q(dir / "d.csv") + " --svg " + q(dir / "d.svg"));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.status == 0);
  CHECK(seconds < 1.0);
  CHECK(lines_of(testing::read_file(dir / "d.csv")).size() == 10001);
  CHECK(testing::read_file(dir / "d.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("moments and bound") {
  const auto m = nlohmann::json::parse(run("moments").out);
  CHECK(m["rho_over_sigma3"].get<double>() >= 1.0);
  CHECK(m["mass"].get<double>() > 0.0);
  const auto b = nlohmann::json::parse(run("bound --n 100").out);
  CHECK(b["rhs_lower_const"].get<double>() ==
        doctest::Approx(b["zolotarev_constant"].get<double>() * m["rho_over_sigma3"].get<double>()));
  CHECK(b["rhs_with_sqrtN_lower"].get<double>() == doctest::Approx(b["rhs_lower_const"].get<double>() / 10));
}

TEST_CASE("replicate: exit status follows the literal verdicts") {
  testing::TempDir dir;
  CHECK(run("replicate --out " + q(dir / "r.json")).status == 0);
  const auto report = nlohmann::json::parse(testing::read_file(dir / "r.json"));
  CHECK(report["rows"].size() == 18);

  testing::write_file(dir / "tiny.json", R"({"variants": {"lower_constant": 0.001}})");
  CHECK(run("replicate --config " + q(dir / "tiny.json") + " --out " + q(dir / "t.csv") + " --format csv").status == 1);
  CHECK(lines_of(testing::read_file(dir / "t.csv")).size() == 19);
}

TEST_CASE("sample then verify") {
  testing::TempDir dir;
  REQUIRE(run("sample --n 500 --seed 4 --out " + q(dir / "e.csv")).status == 0);
  CHECK(lines_of(testing::read_file(dir / "e.csv")).size() == 501);
  CHECK(run("verify --events " + q(dir / "e.csv") + " --out " + q(dir / "v.json")).status == 0);
  const auto v = nlohmann::json::parse(testing::read_file(dir / "v.json"));
  CHECK(v["rows"][0]["report"]["N"] == 500);

  testing::write_file(dir / "far.csv", "index,t_mm\n0,5\n");
  CHECK(run("verify --events " + q(dir / "far.csv") + " --out " + q(dir / "x.json")).status == 2);
}

TEST_CASE("BORNLAB_OUT_DIR redirects relative outputs") {
  testing::TempDir dir;
  ::setenv("BORNLAB_OUT_DIR", dir.path().c_str(), 1);
  const Run r = run("density --points 5 --out rel.csv");
  ::unsetenv("BORNLAB_OUT_DIR");
  CHECK(r.status == 0);
  CHECK(lines_of(testing::read_file(dir / "rel.csv")).size() == 6);
}

TEST_CASE("madelung: plane wave residuals and snapshots") {
  testing::TempDir dir;
  const Run r = run("madelung --preset plane_wave --steps 20 --snapshot-every 10 --out-dir " + q(dir.path()));
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(testing::read_file(dir / "residuals.json"));
  CHECK(j["preset"] == "plane_wave");
  REQUIRE(j["snapshots"].size() == 3);
  CHECK(j["snapshots"][0]["hj"].is_null());
  for (std::size_t i = 1; i < 3; ++i) {
    CHECK(j["snapshots"][i]["hj"]["max"].get<double>() < 1e-8);
    CHECK(j["snapshots"][i]["continuity"]["max"].get<double>() < 1e-8);
  }
  CHECK(j["norm_drift"].get<double>() < 1e-12);
  CHECK(std::filesystem::exists(dir / "snapshot_000020_polar.csv"));
  CHECK(std::filesystem::exists(dir / "snapshot_000010_wave.csv"));

  testing::TempDir zero;
  REQUIRE(run("madelung --steps 0 --out-dir " + q(zero.path())).status == 0);
  const auto z = nlohmann::json::parse(testing::read_file(zero / "residuals.json"));
  CHECK(z["snapshots"].size() == 1);
  CHECK(std::filesystem::exists(zero / "snapshot_000000_wave.csv"));
  CHECK_FALSE(std::filesystem::exists(zero / "snapshot_000001_wave.csv"));
}

TEST_CASE("trajectories: ensemble stays close to R^2") {
  testing::TempDir dir;
  const Run r = run("trajectories --preset free_gaussian --count 10000 --steps 50 --out " + q(dir / "t.csv"));
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["ks_distance"].get<double>() < 0.02);
  CHECK(j["count"] == 10000);
  CHECK(lines_of(testing::read_file(dir / "t.csv")).size() == 10001);
}
