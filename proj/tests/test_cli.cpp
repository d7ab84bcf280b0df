#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "opbsp/cli.hpp"

using namespace opbsp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "opbsp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json json_of(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "opbsp_cli_tests" / name;
  fs::remove_all(dir);
  return dir;
}

const std::string kDemo = std::string(OPBSP_SOURCE_DIR) + "/data/demo_model.csv";

}  // namespace

TEST_CASE("dp and sequence on the demo model") {
  const auto dir = scratch("demo");
  auto r = run({"--model", kDemo, "--out-dir", dir.string(), "--quiet", "dp"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  CHECK(json_of(dir / "dp.json").at("value") == 5.0);

  r = run({"--model", kDemo, "--out-dir", dir.string(), "sequence", "--index", "greedy"});
  REQUIRE(r.code == kExitOk);
  const auto seq = json_of(dir / "sequence.json");
  CHECK(seq.at("columns") == nlohmann::json::array({0}));
  CHECK(seq.at("npv") == 5.0);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "timing.json"));

  r = run({"--model", kDemo, "--out-dir", dir.string(), "sequence", "--index", "greedy",
           "--stop", "exhaust"});
  CHECK(json_of(dir / "sequence.json").at("steps") == 2);
}

TEST_CASE("identical configurations give identical artifacts") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    REQUIRE(run({"--seed", "7", "--dims", "4,4,4", "--out-dir", dir.string(), "generate"}).code ==
            kExitOk);
  }
  CHECK(slurp(a / "model.json") == slurp(b / "model.json"));
  CHECK(json_of(a / "model.json").at("values").size() == 64);

  const auto c = scratch("det_c");
  REQUIRE(run({"--seed", "7", "--dims", "4,4,4", "--out-dir", c.string(), "schedule",
               "--capacity", "tonnage=5"})
              .code == kExitOk);
  // Re-running from the manifest reproduces the run.
  const auto d = scratch("det_d");
  REQUIRE(run({"--config", (c / "manifest.json").string(), "--out-dir", d.string(), "schedule"})
              .code == kExitOk);
  for (const char* f : {"schedule.json", "pit_report.csv", "schedule_summary.json",
                        "manifest.json"}) {
    CHECK(slurp(c / f) == slurp(d / f));
  }
}

TEST_CASE("bounds report on seeded instances is ordered") {
  for (const char* seed : {"1", "2", "3"}) {
    const auto dir = scratch(std::string("bounds_") + seed);
    const auto r = run({"--seed", seed, "--dims", "3,3,3", "--discount", "per_block", "--rho",
                        "0.9", "--out-dir", dir.string(), "bounds"});
    REQUIRE(r.code == kExitOk);
    const auto v = json_of(dir / "bounds.json").at("values");
    for (const char* idx : {"greedy", "gittins", "cone"}) {
      CHECK(v.at(idx).get<double>() <= v.at("Optimum").get<double>() + 1e-9);
    }
    CHECK(v.at("Optimum").get<double>() <= v.at("Index UB").get<double>() + 1e-9);
  }
  const auto zero = scratch("bounds_zero");
  REQUIRE(run({"--dims", "3,3,3", "--out-dir", zero.string(), "generate", "--min-value", "0",
               "--max-value", "0"})
              .code == kExitOk);
  REQUIRE(run({"--model", (zero / "model.json").string(), "--out-dir", zero.string(), "bounds"})
              .code == kExitOk);
  for (const auto& [name, value] : json_of(zero / "bounds.json").at("values").items()) {
    CHECK(value == 0.0);
  }
}

TEST_CASE("DP over budget is reported as n/a in the bounds table") {
  const auto dir = scratch("bounds_na");
  const auto r = run({"--dims", "8,8,6", "--out-dir", dir.string(), "bounds"});
  REQUIRE(r.code == kExitOk);
  CHECK(json_of(dir / "bounds.json").at("values").at("Optimum").is_null());
  CHECK(slurp(dir / "bounds.txt").find("n/a") != std::string::npos);
  CHECK(run({"--dims", "8,8,6", "--out-dir", dir.string(), "dp"}).code == kExitBudget);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  CHECK(run({"--out-dir", dir.string()}).code == kExitUsage);
  CHECK(run({"--out-dir", dir.string(), "sequence", "--index", "nope"}).code == kExitUsage);
  CHECK(run({"--out-dir", dir.string(), "--bogus", "dp"}).code == kExitUsage);
  CHECK(run({"--model", "/nonexistent.csv", "--out-dir", dir.string(), "dp"}).code ==
        kExitError);
  CHECK(run({"--dims", "4,4,4", "--out-dir", dir.string(), "sequence", "--index", "toposort",
             "--lp-budget", "10"})
            .code == kExitBudget);
  const auto v = run({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("toposort sequences come from the LP relaxation") {
  const auto dir = scratch("topo");
  const auto r = run({"--dims", "3,2,2", "--capacity", "tonnage=3", "--out-dir", dir.string(),
                      "sequence", "--index", "toposort", "--stop", "exhaust"});
  REQUIRE(r.code == kExitOk);
  CHECK(json_of(dir / "sequence.json").at("blocks").size() == 12);
}

TEST_CASE("validate accepts packed schedules and rejects broken ones") {
  const auto dir = scratch("validate");
  REQUIRE(run({"--seed", "4", "--dims", "3,3,2", "--capacity", "tonnage=4", "--out-dir",
               dir.string(), "schedule"})
              .code == kExitOk);
  const std::string sched = (dir / "schedule.json").string();
  CHECK(run({"--seed", "4", "--dims", "3,3,2", "--capacity", "tonnage=4", "--out-dir",
             dir.string(), "validate", "--schedule", sched})
            .code == kExitOk);
  CHECK(json_of(dir / "validation.json").at("ok") == true);

  // Every block in period 1 breaks the capacity.
  nlohmann::json all;
  for (int b = 0; b < 18; ++b) all[std::to_string(b)] = 1;
  std::ofstream(dir / "bad.json") << all.dump();
  const auto bad = run({"--seed", "4", "--dims", "3,3,2", "--capacity", "tonnage=4",
                        "--out-dir", dir.string(), "validate", "--schedule",
                        (dir / "bad.json").string()});
  CHECK(bad.code == kExitInfeasible);
  CHECK(json_of(dir / "validation.json").at("kind") == "capacity");

  std::ofstream(dir / "dup.json") << R"({"0": 1, "0": 2})";
  CHECK(run({"--seed", "4", "--dims", "3,3,2", "--out-dir", dir.string(), "validate",
             "--schedule", (dir / "dup.json").string()})
            .code == kExitInfeasible);
}

TEST_CASE("lp-export writes both formats and solves on request") {
  const auto dir = scratch("lp");
  REQUIRE(run({"--model", kDemo, "--horizon", "2", "--out-dir", dir.string(), "lp-export",
               "--solve"})
              .code == kExitOk);
  CHECK(fs::exists(dir / "model.lp"));
  CHECK(json_of(dir / "solution.json").at("objective").get<double>() ==
        doctest::Approx(5 / 1.1).epsilon(1e-12));
  REQUIRE(run({"--model", kDemo, "--horizon", "2", "--out-dir", dir.string(), "lp-export",
               "--format", "mps"})
              .code == kExitOk);
  CHECK(slurp(dir / "model.mps").rfind("NAME", 0) == 0);
}
