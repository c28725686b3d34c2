#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path scratch_root() { return fs::temp_directory_path() / ("tpa_cli_" + std::to_string(::getpid())); }

struct Cleanup {
  ~Cleanup() { fs::remove_all(scratch_root()); }
} cleanup;

fs::path scratch(const std::string& name) {
  const auto p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int tpa(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + TPA_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("run is reproducible and independent of worker count") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(tpa("run --family ising --width 3 --height 3 --beta 1 --k 200 --seed 5 --workers 1 --out-dir " + a.string()) == 0);
  REQUIRE(tpa("run --family ising --width 3 --height 3 --beta 1 --k 200 --seed 5 --workers 3 --out-dir " + b.string()) == 0);
  for (const char* f : {"traces.jsonl", "pool.json", "estimate.json", "curve.csv"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(!slurp(a / f).empty());
  }
  const auto c = scratch("det_c");
  REQUIRE(tpa("run --family ising --width 3 --height 3 --beta 1 --k 200 --seed 6 --out-dir " + c.string()) == 0);
  CHECK(slurp(a / "pool.json") != slurp(c / "pool.json"));
}

TEST_CASE("configuration errors exit with code 2") {
  const auto d = scratch("errors");
  CHECK(tpa("run --k 10 --out-dir " + d.string()) == 2);
  CHECK(tpa("ras --seed 1 --out-dir " + d.string()) == 2);
  CHECK(tpa("omni --seed 1 --epsilon 0.5 --delta 0.1 --lambda-upper 3 --out-dir " + d.string()) == 2);
  CHECK(tpa("run --seed 1 --family nosuch --out-dir " + d.string()) == 2);
  CHECK(tpa("run --seed 1 --family ising --width 5 --height 5 --out-dir " + d.string()) == 2);
  CHECK(tpa("--seed 1") == 2);
}

TEST_CASE("config file with flag override") {
  const auto d = scratch("config");
  std::ofstream(d / "exp.ini") << "family = expinterval\nshell = 0\ncenter = -2\nk = 50\nseed = 9\n";
  REQUIRE(tpa("--config " + (d / "exp.ini").string() + " run --out-dir " + (d / "base").string()) == 0);
  REQUIRE(tpa("--config " + (d / "exp.ini").string() + " run --k 80 --out-dir " + (d / "over").string()) == 0);
  CHECK(load(d / "base" / "estimate.json")["k"] == 50);
  CHECK(load(d / "over" / "estimate.json")["k"] == 80);
  CHECK(load(d / "base" / "pool.json")["beta_center"] == -2.0);
}

TEST_CASE("output directory from the environment") {
  const auto d = scratch("env");
  REQUIRE(tpa("run --seed 2 --k 10", "TPA_OUT_DIR=" + d.string()) == 0);
  CHECK(fs::exists(d / "estimate.json"));
}

TEST_CASE("each subcommand writes its report") {
  const auto d = scratch("modes");
  const std::string o = " --out-dir " + d.string();
  REQUIRE(tpa("ras --seed 3 --center -2 --epsilon 0.3 --delta 0.2" + o) == 0);
  const auto ras = load(d / "ras.json");
  CHECK(ras["schema"] == "tpa.ras/1");
  CHECK(ras["total_samples"] == ras["N1"].get<int>() + ras["N2"].get<int>());
  REQUIRE(tpa("ras --seed 3 --center -0.5 --epsilon 0.2 --delta 0.2 --small-ratio" + o) == 0);
  CHECK(load(d / "ras.json").contains("p_hat"));

  REQUIRE(tpa("schedule --seed 3 --center -6 --k 50" + o) == 0);
  CHECK(slurp(d / "schedule.csv").rfind("# schema: tpa.schedule/1\nindex,alpha\n", 0) == 0);

  REQUIRE(tpa("omni --seed 3 --family ising --width 2 --height 2 --beta 2 --k 100 --epsilon 0.2 --delta 0.1 --lambda-upper 9" + o) == 0);
  CHECK(load(d / "omni.json")["plan"]["k_required"].get<std::uint64_t>() > 0);

  REQUIRE(tpa("evidence --seed 3 --family l1ball --k 500 --n-center 2000" + o) == 0);
  CHECK(load(d / "evidence.json")["evidence"].get<double>() > 0.0);
  REQUIRE(tpa("evidence --seed 3 --family ising --width 2 --height 2 --beta 2 --k 300 --observed-h -3" + o) == 0);
  CHECK(load(d / "evidence.json").contains("enumerated"));

  REQUIRE(tpa("diagnose --seed 3 --center -3 --k 100 --reps 50" + o) == 0);
  CHECK(load(d / "diagnose.json")["all_passed"] == true);
}
