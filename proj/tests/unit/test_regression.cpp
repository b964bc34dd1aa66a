#include <catch_amalgamated.hpp>

#include <pctpdm/cli.hpp>

using namespace pctpdm;
namespace fs = std::filesystem;

namespace {

TargetSystem system_for(const std::string &name) {
  if (name == "example1_osc1") return oscillator1(example1(2.0), 1.0, 1.0);
  if (name == "constant_osc1") return oscillator1(constant_mass(), 1.0, 1.0);
  if (name == "example3_osc1") return oscillator1(example3(1.0), 1.0, 1.0);
  if (name == "example4_morse") return morse(example4(1.0), 1.0, 9.0, 1.0);
  FAIL("no system for fixture " << name);
  throw;
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace

TEST_CASE("fixtures reproduce", "[regression]") {
  const fs::path dir = fixture_dir(PCT_PDM_TEST_FIXTURES);
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() >= 4);

  for (const auto &f : files) {
    std::ifstream in(f);
    const Json fx = Json::parse(in);
    const std::string name = fx["name"];
    INFO(name);
    CHECK(fx["schema"] == kSchema);
    const auto s = system_for(name);
    const auto &gen = fx["generation"];
    const auto &gj = gen["grid"];
    const Grid g{gj["a"].get<double>(), gj["b"].get<double>(), gj["N"].get<int>()};
    const auto rep = verify(s, g, gen["n_check"].get<int>(), gen["tol"].get<double>());
    for (const auto &lv : fx["levels"]) {
      const std::size_t k = lv["index"];
      bool found = false;
      for (const auto &reg : rep.regions) {
        if (k < reg.numeric.size() && close(reg.numeric[k], lv["E_numeric"].get<double>(), 1e-9)) found = true;
      }
      CHECK(found);
    }
    for (const auto &nj : fx["normalization"]) {
      if (!nj.contains("A")) continue;
      CHECK(close(norm_constant(s, nj["n"].get<int>()), nj["A"].get<double>(), 1e-9));
    }
  }
}
