#include "masskit/commands.hpp"
#include "masskit/config.hpp"
#include "masskit/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace masskit;
namespace fs = std::filesystem;

namespace {

fs::path scene(const std::string& name) { return fs::path(MASSKIT_SCENE_DIR) / (name + ".json"); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "masskit_unit" / name;
  fs::remove_all(p);
  return p;
}

struct Run {
  int code = -1;
  std::string out, err;
  fs::path dir;
};

Run run(const std::string& command, const std::string& scene_name, std::optional<int> threads = {}) {
  Run r;
  r.dir = scratch(scene_name + (threads ? "_t" + std::to_string(*threads) : ""));
  RunOptions opt{command, scene(scene_name), r.dir, threads, std::nullopt};
  std::ostringstream out, err;
  r.code = run_command(opt, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("workbench_cli") {

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

TEST_CASE("numbers print shortest round-trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("atomic write leaves no temporary behind") {
  const fs::path dir = scratch("atomic");
  atomic_write(dir / "a.txt", "one");
  atomic_write(dir / "a.txt", "two");
  CHECK(slurp(dir / "a.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
}

TEST_CASE("failing audits carry margin, location and anchor") {
  RunManifest m("mass", "0");
  m.audit(audit_at_most("x", 2.0, 1.0, "some anchor"));
  m.audit(audit_at_least("y", 3.0, 1.0, "other"));
  m.audit(audit_at_most("x", 0.5, 1.0, "some anchor"));  // replaces the first
  CHECK(m.audits().size() == 2);
  CHECK(m.all_pass());
  m.audit(audit_at_least("z", 0.0, 1.0, "third"));
  const json j = m.to_json();
  CHECK(j["result"] == "FAIL");
  const json& z = j["audits"][2];
  CHECK(z["result"] == "FAIL");
  CHECK(z["margin"].get<double>() == -1.0);
  CHECK(z.contains("location"));
  CHECK(z["anchor"] == "third");
}

TEST_CASE("schema errors name the offending pointer") {
  CHECK_THROWS_AS(SceneConfig::parse("{\"dimension\": 3}"), SchemaError);
  try {
    SceneConfig::parse("{\"schema\": 2}");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/schema");
  }
  const SceneConfig cfg = SceneConfig::parse(R"({"schema": 1, "dimension": "three", "x": [3, 2]})");
  try {
    cfg.dimension();
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/dimension");
  }
  CHECK_THROWS_AS(cfg.ladder("/x", 2), SchemaError);
  CHECK_THROWS_AS(SceneConfig::parse("{not json"), SchemaError);
}

TEST_CASE("config hash covers the raw bytes") {
  const SceneConfig a = SceneConfig::parse(R"({"schema": 1})");
  const SceneConfig b = SceneConfig::parse(R"({"schema":1})");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() == SceneConfig::parse(R"({"schema": 1})").hash());
}

TEST_CASE("exit code contract") {
  CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
  CHECK(exit_code_for(DomainError("x")) == kExitConfig);
  CHECK(exit_code_for(PreconditionError("x")) == kExitAudit);
  CHECK(exit_code_for(GluingError("x")) == kExitAudit);
  CHECK(exit_code_for(SolverError("x")) == kExitNumerical);
  CHECK(exit_code_for(PositivityError("x")) == kExitNumerical);
}

TEST_CASE("mass command on Schwarzschild") {
  const Run r = run("mass", "mass_schwarzschild");
  CHECK(r.code == kExitOk);
  const json rep = read_json(r.dir / "report.json");
  CHECK(rep["mass"]["extrapolated"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(fs::exists(r.dir / "manifest.json"));
  CHECK(fs::exists(r.dir / "timing.json"));
  CHECK(read_json(r.dir / "manifest.json")["result"] == "PASS");
}

TEST_CASE("Euclidean mass is zero to 1e-10") {
  const Run r = run("mass", "mass_euclidean");
  CHECK(r.code == kExitOk);
  CHECK(std::abs(read_json(r.dir / "report.json")["mass"]["extrapolated"].get<double>()) <= 1e-10);
}

TEST_CASE("missing radius ladder exits 1 and names the field") {
  const Run r = run("mass", "mass_missing_ladder");
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("/mass/radii") != std::string::npos);
}

TEST_CASE("zero potential records A = 0") {
  const Run r = run("solve", "solve_zero");
  CHECK(r.code == kExitOk);
  CHECK(read_json(r.dir / "report.json")["solution"]["A_integral"].get<double>() == 0.0);
  CHECK(fs::exists(r.dir / "iterations.jsonl"));
}

TEST_CASE("bump scene matches its bundled oracle") {
  const Run r = run("solve", "solve_bump");
  CHECK(r.code == kExitOk);
}

TEST_CASE("smallness violation exits 2 with the margin") {
  const Run r = run("solve", "solve_large_negative");
  CHECK(r.code == kExitAudit);
  const json err = read_json(r.dir / "report.json")["error"];
  CHECK(err.contains("margin"));
  CHECK(err["margin"].get<double>() < 0.0);
  CHECK(err.contains("inequality"));
  CHECK(err.contains("anchor"));
  CHECK(r.err.find("violated") != std::string::npos);
}

TEST_CASE("deform on Schwarzschild is zero work") {
  const Run r = run("deform", "deform_schwarzschild");
  CHECK(r.code == kExitOk);
  const std::string trend = slurp(r.dir / "trend.csv");
  CHECK(trend.rfind("s,", 0) == 0);
}

TEST_CASE("deform on negative scalar curvature exits 2") {
  const Run r = run("deform", "deform_negative_scalar");
  CHECK(r.code == kExitAudit);
  CHECK(read_json(r.dir / "report.json")["error"]["kind"].is_string());
}

TEST_CASE("compactify refuses positive mass") {
  const Run r = run("compactify", "compactify_positive");
  CHECK(r.code == kExitAudit);
  CHECK(read_json(r.dir / "report.json")["error"]["lhs"].get<double>() >= 1.0);
}

TEST_CASE("compactify on negative mass writes the torus chart") {
  const Run r = run("compactify", "compactify_negative");
  CHECK(r.code == kExitOk);
  const json header = read_json(r.dir / "torus_chart.json");
  CHECK(header["dimension"] == 3);
  CHECK(fs::exists(r.dir / "torus_chart.csv"));
}

TEST_CASE("ale with the trivial group gives equal masses") {
  const Run r = run("ale", "ale_trivial");
  CHECK(r.code == kExitOk);
}

TEST_CASE("thread count does not change outputs") {
  const Run a = run("converge", "converge_bartnik", 1);
  const Run b = run("converge", "converge_bartnik", 3);
  CHECK(a.code == kExitOk);
  CHECK(b.code == kExitOk);
  for (const char* f : {"report.json", "manifest.json", "convergence.csv"}) {
    CHECK(slurp(a.dir / f) == slurp(b.dir / f));
  }
}

TEST_CASE("argv front end") {
  const std::string cfg = scene("mass_euclidean").string();
  const std::string out = scratch("argv").string();
  const char* argv[] = {"masskit", "mass", "--config", cfg.c_str(), "--out", out.c_str(), "--seed", "5"};
  std::ostringstream o, e;
  CHECK(run_cli(8, argv, o, e) == kExitOk);
  CHECK(read_json(fs::path(out) / "report.json")["seed"] == 5);
  const char* bad[] = {"masskit", "frobnicate"};
  CHECK(run_cli(2, bad, o, e) == kExitConfig);
  const char* missing[] = {"masskit", "mass"};
  CHECK(run_cli(2, missing, o, e) == kExitConfig);
}

}  // TEST_SUITE
