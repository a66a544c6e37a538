#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "dpt/cli.hpp"
#include "dpt/model.hpp"

using namespace dpt;
using namespace dpt::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dpt_test_cli" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

nlohmann::json fits(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "fits.json")); }

Exit run_quiet(const std::string& command, Settings s) {
  std::ostringstream log;
  return run_command(resolve(command, s), log);
}

int run_argv(std::vector<std::string> args) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("defaults resolve for every command") {
  for (auto c : kCommands) {
    const auto cfg = resolve(c, {});
    CHECK(cfg.command == c);
    CHECK(cfg.omega == 1.0);
    CHECK(cfg.workers == 1);
    CHECK_FALSE(cfg.out.empty());
  }
  const auto t1 = resolve("table1", {});
  REQUIRE(t1.window);
  CHECK(t1.window->first == 1e-8);
  CHECK(t1.window->second == 1e-4);
  CHECK(t1.kappa2 == std::vector<double>{1e-9});
  CHECK(resolve("collapse", {}).kappa2.size() == 3);
  const auto oracle = resolve("oracle", {});
  CHECK(oracle.kappa1 == 0.2);
  CHECK(oracle.lambda.value() == 0.3);
  CHECK(resolve("adr", {}).classes() == std::vector<SymmetryClass>{SymmetryClass::Weak});
}

TEST_CASE("invalid settings are configuration errors") {
  CHECK_THROWS_AS(resolve("nope", {}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"omega", "-1"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"omega", "1x"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"window", "1e-3"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"window", "1e-1,1e-3"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"grid", "2.5"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"cutoff", "4"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"class", "medium"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"closure", "other"}}), ConfigError);
  CHECK_THROWS_AS(resolve("table1", {{"colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(resolve("collapse", {{"kappa2", "1e-9,0"}}), ConfigError);
}

TEST_CASE("INI files: sections, precedence and round trip") {
  const auto dir = scratch("ini");
  fs::create_directories(dir);
  const auto path = dir / "run.ini";
  {
    std::ofstream f(path);
    f << "[common]\nomega = 2\nworkers = 3\n\n[table1]\nomega = 1.5\ngrid = 9\n\n[collapse]\ngrid = 5\n";
  }
  const auto s = load_ini(path, "table1");
  CHECK(s.at("omega") == "1.5");
  CHECK(s.at("workers") == "3");
  CHECK(s.at("grid") == "9");
  CHECK(load_ini(path, "collapse").at("omega") == "2");

  const auto cfg = resolve("table1", s);
  write_ini(dir / "echo.ini", "table1", cfg.resolved);
  const auto back = resolve("table1", load_ini(dir / "echo.ini", "table1"));
  CHECK(back.resolved == cfg.resolved);

  {
    std::ofstream f(dir / "bad.ini");
    f << "[table1]\nfrequency = 2\n";
  }
  CHECK_THROWS_AS(load_ini(dir / "bad.ini", "table1"), ConfigError);
  {
    std::ofstream f(dir / "badsec.ini");
    f << "[plots]\nomega = 2\n";
  }
  CHECK_THROWS_AS(load_ini(dir / "badsec.ini", "table1"), ConfigError);
}

TEST_CASE("DPTLAB_OUT sets the default output root") {
  ::setenv("DPTLAB_OUT", "/tmp/somewhere", 1);
  CHECK(resolve("oracle", {}).out == fs::path("/tmp/somewhere/oracle"));
  ::unsetenv("DPTLAB_OUT");
  CHECK(resolve("oracle", {}).out == fs::path("dptlab-out/oracle"));
}

TEST_CASE("table1 default run: provenance files and all cells matching") {
  const auto dir = scratch("table1");
  CHECK(run_quiet("table1", {{"out", dir.string()}}) == Exit::Pass);
  for (auto f : {"config.ini", "VERSION", "fits.json", "report.txt", "sweep.csv"}) CHECK(fs::exists(dir / f));
  const auto j = fits(dir);
  CHECK(j["status"] == "pass");
  CHECK(j["rows"].size() == 4);
  for (const auto& row : j["rows"])
    for (const auto& cell : row["cells"]) CHECK(cell["exponent_match"] == true);
  CHECK(slurp(dir / "report.txt").find("MISMATCH") == std::string::npos);
}

TEST_CASE("table1 output is byte-identical across runs and worker counts") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  run_quiet("table1", {{"out", a.string()}, {"workers", "1"}});
  run_quiet("table1", {{"out", b.string()}, {"workers", "3"}});
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  CHECK(fits(a)["rows"] == fits(b)["rows"]);
}

TEST_CASE("table1 outside the asymptotic window reports a warning") {
  const auto dir = scratch("window");
  run_quiet("table1", {{"out", dir.string()}, {"window", "1e-3,1e-1"}});
  const auto j = fits(dir);
  CHECK(j["status"] == "warning");
  CHECK(j["outside_asymptotic_window"] == true);
  CHECK(slurp(dir / "report.txt").find("WARNING") != std::string::npos);
}

TEST_CASE("table1 at omega = 2: exponents unchanged, coefficients rescale") {
  const auto one = scratch("omega1");
  const auto two = scratch("omega2");
  CHECK(run_quiet("table1", {{"out", one.string()}, {"class", "weak"}, {"phase", "normal"}}) == Exit::Pass);
  CHECK(run_quiet("table1", {{"out", two.string()}, {"class", "weak"}, {"phase", "normal"}, {"omega", "2"}}) ==
        Exit::Pass);
  const auto c1 = fits(one)["rows"][0]["cells"][0];
  const auto c2 = fits(two)["rows"][0]["cells"][0];
  CHECK(c1["fit"]["exponent"].get<double>() == doctest::Approx(c2["fit"]["exponent"].get<double>()).epsilon(1e-3));
  const double lc1 = critical_lambda({1.0, 0.0, 0.1, 1.0});
  const double lc2 = critical_lambda({2.0, 0.0, 0.1, 1.0});
  CHECK(c1["predicted_coefficient"].get<double>() == doctest::Approx(lc1 / 4));
  CHECK(c2["predicted_coefficient"].get<double>() == doctest::Approx(lc2 / 4));
  CHECK(c2["fit"]["coefficient"].get<double>() / c1["fit"]["coefficient"].get<double>() ==
        doctest::Approx(lc2 / lc1).epsilon(0.01));
}

TEST_CASE("adr for the strong normal phase at the Gaussian level vanishes") {
  const auto dir = scratch("adr");
  CHECK(run_quiet("adr", {{"out", dir.string()}, {"class", "strong"}, {"phase", "normal"}, {"level", "gaussian"}}) ==
        Exit::Pass);
  const auto cell = fits(dir)["runs"][0]["series"][0];
  CHECK(cell["max_abs"].get<double>() == 0.0);
  CHECK(cell["exponent_match"] == true);
}

TEST_CASE("command line: version, parse errors and missing config") {
  CHECK(run_argv({"dptlab", "--version"}) == 0);
  CHECK(run_argv({"dptlab", "table1", "--bogus", "1"}) == 2);
  CHECK(run_argv({"dptlab"}) == 2);
  CHECK(run_argv({"dptlab", "table1", "--config", "/nonexistent/dpt.ini"}) == 2);
  CHECK(run_argv({"dptlab", "table1", "--omega", "abc"}) == 2);
}

TEST_CASE("command line: flags override the config file") {
  const auto dir = scratch("flags");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "c.ini");
    f << "[table1]\nomega = 3\ngrid = 11\nclass = weak\nphase = normal\n";
  }
  const auto out = dir / "out";
  CHECK(run_argv({"dptlab", "table1", "--config", (dir / "c.ini").string(), "--omega", "2", "--out", out.string()}) ==
        0);
  const auto echoed = load_ini(out / "config.ini", "table1");
  CHECK(echoed.at("omega") == "2");
  CHECK(echoed.at("grid") == "11");
}
