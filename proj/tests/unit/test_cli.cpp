#include <catch_amalgamated.hpp>

#include <pctpdm/cli.hpp>

#include <cstdio>
#include <numbers>
#include <sys/wait.h>

using namespace pctpdm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cfg(const RunConfig &cfg) {
  std::ostringstream out, err;
  const int code = run(cfg, out, err);
  return {code, out.str(), err.str()};
}

RunConfig config(Command cmd, const std::string &cls, const std::string &profile = "constant") {
  RunConfig c;
  c.command = cmd;
  c.class_tag = cls;
  c.profile_id = profile;
  c.timestamp = false;
  return c;
}

/// Runs the installed executable; returns exit status and stdout.
Outcome run_exe(const std::string &args) {
  const std::string cmd = std::string(PCT_PDM_CLI) + " " + args + " 2>/dev/null";
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, ""};
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("pct_pdm_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

} // namespace

TEST_CASE("profiles", "[cli]") {
  RunConfig c;
  c.timestamp = false;
  auto r = run_cfg(c);
  CHECK(r.code == 0);
  for (const auto &id : catalog_ids()) CHECK(r.out.find(id) != std::string::npos);
  c.id_filter = "example3";
  r = run_cfg(c);
  CHECK(r.code == 0);
  CHECK(r.out.find("1/(gamma + x^2)") != std::string::npos);
  CHECK(r.out.find("example1") == std::string::npos);
  c.id_filter = "nosuch";
  r = run_cfg(c);
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown profile") != std::string::npos);

  c.id_filter.reset();
  c.output = scratch("profiles.json").string();
  CHECK(run_cfg(c).code == 0);
  const Json j = Json::parse(slurp(*c.output));
  CHECK(j["schema"] == kSchema);
  CHECK(j["profiles"].size() == catalog().size());
  CHECK_FALSE(j.contains("generated_at"));
}

TEST_CASE("solve", "[cli]") {
  SECTION("oscillator-1 on example 1") {
    auto c = config(Command::Solve, "osc1", "example1");
    c.nmax = 4;
    const auto r = run_cfg(c);
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["levels"].size() == 5);
    for (int n = 0; n <= 4; ++n) CHECK(j["levels"][n]["E"].get<double>() == n + 0.5);
    CHECK(j["profile_params"]["gamma"] == 2.0);
    CHECK(j["potential_samples"].size() > 0);
  }
  SECTION("coulomb-2 spacing") {
    auto c = config(Command::Solve, "cou2", "example1");
    c.nmax = 3;
    const Json j = Json::parse(run_cfg(c).out);
    for (int n = 0; n <= 3; ++n) CHECK(j["levels"][n]["E"].get<double>() == -2.0 * (n + 1));
    CHECK(j["candidates"][1]["label"] == "reference_formula");
  }
  SECTION("morse lists both n_max readings") {
    auto c = config(Command::Solve, "morse", "example4");
    c.xi = 9.0;
    const Json j = Json::parse(run_cfg(c).out);
    CHECK(j["n_max_candidates"]["printed_floor_xi_over_2"] == 4);
    CHECK(j["n_max_candidates"]["normalizable_xi_minus_2n_minus_1_positive"] == 3);
    CHECK(j["levels"].size() == 5);
  }
  SECTION("csv") {
    auto c = config(Command::Solve, "osc1");
    c.format = Format::CSV;
    c.nmax = 1;
    const auto r = run_cfg(c);
    CHECK(r.out.rfind("kind,label,n,x,value\n", 0) == 0);
    CHECK(r.out.find("level,target_formula,1,,1.5\n") != std::string::npos);
  }
  SECTION("radial") {
    auto c = config(Command::Solve, "radial-a");
    c.gamma = 2.0;
    c.nmax = 2;
    const Json j = Json::parse(run_cfg(c).out);
    CHECK(j["radial"]["case"].get<std::string>().size() > 0);
    CHECK(j["levels"][1]["E"].get<double>() - j["levels"][0]["E"].get<double>() == 4.0);
  }
}

TEST_CASE("verify", "[cli]") {
  auto c = config(Command::Verify, "osc1");
  c.grid = Grid{-12.0, 12.0, 4000};
  c.n_check = 5;
  c.output = scratch("verify.json").string();
  auto r = run_cfg(c);
  CHECK(r.code == 0);
  const Json j = Json::parse(slurp(*c.output));
  CHECK(j["all_matched"] == true);
  CHECK(j["pairs"].size() == 6);
  CHECK(j["system"]["class"] == "osc1");
  CHECK(r.out.find("target_formula") != std::string::npos);

  auto m = config(Command::Verify, "cou1", "example1");
  m.n_check = 2;
  m.tol = 1e-5;
  r = run_cfg(m);
  CHECK(r.code == 1); // published spectrum is not supported
  CHECK(r.out.find("reference_formula") != std::string::npos);

  m.format = Format::CSV;
  m.output = scratch("verify.csv").string();
  run_cfg(m);
  CHECK(slurp(*m.output).rfind("candidate,n,E_analytic", 0) == 0);
}

TEST_CASE("sample", "[cli]") {
  auto c = config(Command::Sample, "osc1");
  c.grid = Grid{-6.0, 6.0, 199};
  const Json j = Json::parse(run_cfg(c).out);
  for (const auto &row : j["samples"]) {
    const double x = row["x"];
    CHECK_THAT(row["phi"].get<double>(), WithinAbs(std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x), 1e-8));
  }
  auto e = config(Command::Sample, "osc1", "example1");
  e.n = 2;
  e.format = Format::CSV;
  const auto r = run_cfg(e);
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "x,m,mu,V,phi");
  std::vector<double> phi;
  while (std::getline(lines, line)) phi.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  CHECK(count_sign_changes(phi) == 2);

  auto bad = config(Command::Sample, "morse", "example4");
  bad.xi = 9.0;
  bad.n = 5;
  CHECK(run_cfg(bad).code == 2);
}

TEST_CASE("exit codes", "[cli]") {
  auto c = config(Command::Solve, "osc1");
  c.alpha = -1.0;
  CHECK(run_cfg(c).code == 2);
  c = config(Command::Solve, "osc9");
  CHECK(run_cfg(c).code == 2);
  c = config(Command::Solve, "morse", "example4");
  CHECK(run_cfg(c).code == 2); // --xi missing
  c = config(Command::Solve, "radial-a");
  CHECK(run_cfg(c).code == 2); // --gamma missing
  c = config(Command::Solve, "osc1", "nosuch");
  CHECK(run_cfg(c).code == 2);

  const fs::path prof = scratch("negative.json");
  write_atomic(prof, R"({"id": "constant", "domain": ["-inf", -1]})");
  c = config(Command::Solve, "cou2");
  c.profile_file = prof.string();
  CHECK(run_cfg(c).code == 3); // empty mu > 0 domain

  c = config(Command::Verify, "osc1", "example4");
  c.grid = Grid{-1.0, 1.0, 16};
  CHECK(run_cfg(c).code == 3); // m = 0 on the grid

  c = config(Command::Verify, "osc1");
  c.grid = Grid{1.0, 2.0, 20, Coordinate::Log};
  CHECK(run_cfg(c).code == 2);

  CHECK(exit_code_for(ErrorKind::ParseError) == 2);
  CHECK(exit_code_for(ErrorKind::NonNormalizable) == 3);
}

TEST_CASE("grid parsing", "[cli]") {
  const Grid g = parse_grid("-12:12:4000", false);
  CHECK(g.a == -12.0);
  CHECK(g.b == 12.0);
  CHECK(g.N == 4000);
  CHECK(parse_grid("0.001:10:100", true).coordinate == Coordinate::Log);
  CHECK_THROWS_AS(parse_grid("1:2", false), Error);
  CHECK_THROWS_AS(parse_grid("a:2:100", false), Error);
  CHECK_THROWS_AS(parse_grid("0:1:10", false), Error);
}

TEST_CASE("executable", "[cli]") {
  CHECK(run_exe("profiles").code == 0);
  CHECK(run_exe("profiles --id nosuch").code == 2);
  CHECK(run_exe("solve --class osc1 --alpha 0").code == 2);
  CHECK(run_exe("solve --class osc1 --bogus").code == 2);
  CHECK(run_exe("verify --class osc1 --grid -12:12:4000 --ncheck 3").code == 0);
  CHECK(run_exe("solve --class osc1 --param gamma=2 --profile example1 --nmax 1").code == 0);
  CHECK(run_exe("solve --class osc1 --param gamma --profile example1").code == 2);
  CHECK(run_exe("solve --class osc1 --log-grid").code == 2);
}

TEST_CASE("outputs are deterministic", "[cli][property]") {
  const fs::path a = scratch("a.json");
  const fs::path b = scratch("b.json");
  const std::string args = "verify --class osc1 --profile example1 --ncheck 3 --tol 1e-5 --no-timestamp -o ";
  CHECK(run_exe(args + a.string()).code == 0);
  CHECK(run_exe(args + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());

  const std::string sample = "sample --class cou1 --profile example2 --n 1 --format csv --no-timestamp";
  const auto s1 = run_exe(sample);
  const auto s2 = run_exe(sample);
  CHECK(s1.code == 0);
  CHECK(s1.out == s2.out);

  for (const auto &entry : fs::directory_iterator(a.parent_path())) {
    CHECK(entry.path().string().find(".tmp.") == std::string::npos);
  }
}

TEST_CASE("fixture directory override", "[cli]") {
  ::unsetenv("PCT_PDM_FIXTURES");
  CHECK(fixture_dir("/fallback") == fs::path("/fallback"));
  ::setenv("PCT_PDM_FIXTURES", "/elsewhere", 1);
  CHECK(fixture_dir("/fallback") == fs::path("/elsewhere"));
  ::unsetenv("PCT_PDM_FIXTURES");
}
