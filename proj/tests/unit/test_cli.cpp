#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../oracles.hpp"
#include "doctest.h"
#include "json.hpp"
#include "wkam/commands.hpp"
#include "wkam/config.hpp"
#include "wkam/errors.hpp"

using namespace wkam;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "wkam_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Result {
  int code;
  std::string log;
  std::string err;
};

Result run(const std::string& cmd, const fs::path& config, const fs::path& out, int threads = 1,
           bool overwrite = false) {
  std::ostringstream log, err;
  const int code = run_command(cmd, {config, out, threads, overwrite}, log, err);
  return {code, log.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string key_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

json decay_config() {
  return json::parse(R"({
    "model": {"family": "quadratic-discounted", "lambda": 1.0},
    "grid": {"N": 32, "dt": 0.001, "v_max": 32.0},
    "solver": {"T": 1.0},
    "initial": {"constant": 2.0},
    "output": {"every": 100}
  })");
}

json pendulum_config() {
  return json::parse(R"({
    "model": {"family": "quadratic-mechanical", "potential": [[1, 0, 1.0]], "shift": 1.0},
    "grid": {"N": 128, "dt": 0.0625, "v_max": 6.0},
    "initial": {"terms": [[1, 0, 0.0, 0.5]]}
  })");
}

}  // namespace

TEST_CASE("config defaults and resolved form") {
  const auto c = parse_config(json::object());
  CHECK(c.model.family == Family::QuadraticMechanical);
  CHECK(c.grid.n() == 64);
  CHECK(c.resolved["grid"]["quadrature"] == "corrected");
  CHECK(c.resolved["solver"]["tol"] == 1e-10);
  CHECK(c.resolved["seed"] == 1);
}

TEST_CASE("config validation names the key") {
  CHECK(key_of({{"model", {{"family", "quartic"}}}}) == "model.family");
  CHECK(key_of({{"grid", {{"N", 64}, {"dt", 0.001}, {"v_max", 1.0}}}}) == "grid.v_max");
  CHECK(key_of({{"model", {{"family", "quadratic-discounted"}, {"lambda", 40.0}}},
                {"grid", {{"dt", 0.0625}}}}) == "grid.dt");
  CHECK(key_of({{"grid", {{"dim", 2}}}}) == "grid.dim");
  CHECK(key_of({{"solver", {{"T", 0.3}}}}) == "solver.T");
  CHECK(key_of({{"solver", {{"colour", 1}}}}) == "solver.colour");
  CHECK(key_of({{"oracle", {{"alpha", 0.5}}}}) == "oracle.alpha");
  CHECK(key_of({{"critical", {{"T_max", 2.0}}}}) == "critical.T_max");
  CHECK(key_of({{"characteristic", {{"momentum", "guess"}}}}) == "characteristic.momentum");
  CHECK(key_of({{"model", {{"family", "quadratic-nonlinear-u"}}}}) == "model.f");
  CHECK(key_of({{"extra", 1}}) == "extra");
}

TEST_CASE("solve reproduces the exponential decay") {
  const auto dir = scratch("solve");
  const auto cfg = write_config(dir, decay_config());
  const auto r = run("solve", cfg, dir / "out");
  REQUIRE(r.code == kExitOk);
  std::ifstream in(dir / "out" / "u_T.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "j,x,u");
  while (std::getline(in, line)) {
    const double u = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(std::abs(u - oracle::exp_decay(2.0, 1.0, 1.0)) <= 1e-3);
  }
  const auto manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["config"]["grid"]["N"] == 32);
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest.contains("version"));
  CHECK(manifest.contains("seconds"));
}

TEST_CASE("validation failures exit with 2") {
  const auto dir = scratch("invalid");
  auto j = decay_config();
  j["model"]["lambda"] = 2000.0;
  const auto r = run("solve", write_config(dir, j), dir / "out");
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("dt") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("output directory protection") {
  const auto dir = scratch("protect");
  const auto cfg = write_config(dir, decay_config());
  REQUIRE(run("solve", cfg, dir / "out").code == kExitOk);
  CHECK(run("solve", cfg, dir / "out").code == kExitInvalid);
  std::ofstream(dir / "out" / "notes.txt") << "keep";
  CHECK(run("solve", cfg, dir / "out", 1, true).code == kExitOk);
  CHECK(fs::exists(dir / "out" / "notes.txt"));
}

TEST_CASE("reruns are byte-identical across thread counts") {
  const auto dir = scratch("determinism");
  auto j = pendulum_config();
  j["model"]["family"] = "quadratic-discounted";
  j["model"]["lambda"] = 1.0;
  j["model"]["shift"] = 0.0;
  const auto cfg = write_config(dir, j);
  REQUIRE(run("solve", cfg, dir / "a", 1).code == kExitOk);
  REQUIRE(run("solve", cfg, dir / "b", 4).code == kExitOk);
  for (const char* f : {"spacetime.csv", "fixed_point.csv", "u_T.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("converge") {
  const auto dir = scratch("converge");
  SUBCASE("normalized pendulum converges") {
    const auto r = run("converge", write_config(dir, pendulum_config()), dir / "out");
    CHECK(r.code == kExitOk);
    const auto m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["results"]["converged"] == true);

    // restarting from the stored limit converges at once
    auto j = pendulum_config();
    j["initial"] = {{"csv", (dir / "out" / "u_inf.csv").string()}};
    const auto r2 = run("converge", write_config(dir / "again", j), dir / "again" / "out");
    CHECK(r2.code == kExitOk);
    const auto conv = slurp(dir / "again" / "out" / "convergence.csv");
    CHECK(std::count(conv.begin(), conv.end(), '\n') == 2);
  }
  SUBCASE("un-normalized pendulum drifts at the critical rate") {
    auto j = pendulum_config();
    j["model"]["shift"] = 0.0;
    j["solver"] = {{"t_final", 8.0}};
    const auto r = run("converge", write_config(dir, j), dir / "out");
    CHECK(r.code == kExitNoConvergence);
    const auto m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["results"]["converged"] == false);
    const double c = oracle::mechanical_critical_value([](double x) { return std::cos(2 * oracle::kPi * x); });
    CHECK(std::abs(double(m["results"]["drift_rate"]) + c) <= 2e-2);
  }
}

TEST_CASE("critical and automatic shift") {
  const auto dir = scratch("critical");
  auto j = pendulum_config();
  j["grid"]["N"] = 64;
  j["model"].erase("shift");
  REQUIRE(run("critical", write_config(dir, j), dir / "out").code == kExitOk);
  const auto m = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(std::abs(double(m["results"]["c"]) - 1.0) <= 2e-2);

  j["model"]["shift"] = "auto";
  const auto r = run("converge", write_config(dir / "auto", j), dir / "auto" / "out");
  CHECK(r.code == kExitOk);
  const auto m2 = json::parse(slurp(dir / "auto" / "out" / "manifest.json"));
  CHECK(std::abs(double(m2["results"]["auto_shift_c"]) - 1.0) <= 2e-2);
}

TEST_CASE("action, char and oracle commands write their tables") {
  const auto dir = scratch("misc");
  auto j = pendulum_config();
  j["model"] = {{"family", "quadratic-discounted"}, {"lambda", 1.0}, {"potential", {{1, 0, 1.0}}}};
  j["grid"] = {{"N", 64}, {"dt", 0.0625}, {"v_max", 4.0}};
  const auto cfg = write_config(dir, j);
  REQUIRE(run("action", cfg, dir / "action").code == kExitOk);
  const auto action = slurp(dir / "action" / "action.csv");
  CHECK(std::count(action.begin(), action.end(), '\n') == 1 + 64 * 64);
  REQUIRE(run("char", cfg, dir / "char").code == kExitOk);
  CHECK(fs::exists(dir / "char" / "trajectory.csv"));
  CHECK(fs::exists(dir / "char" / "chain.csv"));
  REQUIRE(run("oracle", cfg, dir / "oracle").code == kExitOk);
  CHECK(fs::exists(dir / "oracle" / "u_lf.csv"));
  CHECK(run("bogus", cfg, dir / "bogus").code == kExitInvalid);
}

TEST_CASE("check battery") {
  const auto dir = scratch("check");
  const json base = json::parse(R"({
    "model": {"family": "quadratic-mechanical"},
    "grid": {"N": 256, "dt": 0.125, "v_max": 2.0},
    "initial": {"terms": [[1, 0, 0.0, 0.2]]},
    "compare": {"terms": [[1, 0, 0.1, 0.0]]},
    "characteristic": {"T": 0.5, "x_end": 0.5},
    "check": {"n_samples": 300, "n_trajectories": 10, "t_list": [0.5, 1.0]}
  })");
  SUBCASE("passing configuration") {
    const auto r = run("check", write_config(dir, base), dir / "out");
    CHECK(r.code == kExitOk);
    for (const char* s : {"assumptions", "properties", "characteristics", "oracle"}) {
      const auto text = slurp(dir / "out" / (std::string("check_") + s + ".csv"));
      CHECK(text.rfind("name,value,threshold,pass\n", 0) == 0);
    }
  }
  SUBCASE("decreasing f fails the assumption suite") {
    auto j = base;
    j["model"] = {{"family", "quadratic-nonlinear-u"}, {"f", {{0.0, 0.0}, {1.0, -0.5}}}};
    const auto r = run("check", write_config(dir, j), dir / "out");
    CHECK(r.code == kExitSuiteFailure);
    CHECK(r.log.find("assumptions: FAIL") != std::string::npos);
    const auto text = slurp(dir / "out" / "check_assumptions.csv");
    const auto pos = text.find("\nH5,");
    REQUIRE(pos != std::string::npos);
    const auto line = text.substr(pos + 1, text.find('\n', pos + 1) - pos - 1);
    CHECK(line.back() == '0');
  }
  SUBCASE("identical inputs") {
    auto j = base;
    j["compare"] = j["initial"];
    const auto r = run("check", write_config(dir, j), dir / "out");
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(dir / "out" / "check_properties.csv"));
  }
}
