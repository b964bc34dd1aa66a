// Writes the regression fixtures consumed by the test suite. Values come from
// the oracle and quadrature; they are regenerated, never edited by hand.
//
//   gen_fixtures [output-dir]     (default: $PCT_PDM_FIXTURES or tests/fixtures)

#include <pctpdm/cli.hpp>

#include <iostream>

using namespace pctpdm;

namespace {

Json oracle_fixture(const std::string &name, const TargetSystem &s, const Grid &g, int n_check, double tol) {
  const SpectrumReport rep = verify(s, g, n_check, tol);
  Json j;
  j["schema"] = kSchema;
  j["kind"] = "fixture";
  j["name"] = name;
  j["class"] = to_string(s.tag);
  j["profile"] = s.profile_id;
  j["params"] = params_json(s.params);
  j["profile_params"] = params_json(s.profile.params);
  j["generation"] = {{"tool", "gen_fixtures"},
                     {"grid", grid_json(g)},
                     {"n_check", n_check},
                     {"tol", tol},
                     {"normalization_rule", "composite Simpson, " + std::to_string(kDefaultNormPoints) +
                                                " points on the suggested box"}};
  j["levels"] = Json::array();
  for (const auto &reg : rep.regions) {
    for (std::size_t k = 0; k < reg.numeric.size() && static_cast<int>(k) <= n_check; ++k) {
      j["levels"].push_back({{"index", k}, {"E_numeric", reg.numeric[k]}, {"E_numeric_raw", reg.numeric_raw[k]}});
    }
  }
  j["normalization"] = Json::array();
  for (int n = 0; n <= n_check; ++n) {
    if (!s.n_range.contains(n)) continue;
    try {
      j["normalization"].push_back({{"n", n}, {"A", norm_constant(s, n)}});
    } catch (const Error &e) {
      j["normalization"].push_back({{"n", n}, {"error", e.what()}});
    }
  }
  return j;
}

} // namespace

int main(int argc, char **argv) {
  const std::filesystem::path dir =
      argc > 1 ? std::filesystem::path(argv[1]) : fixture_dir(PCT_PDM_DEFAULT_FIXTURES);
  try {
    struct Item {
      std::string name;
      TargetSystem system;
      Grid grid;
      int n_check;
      double tol;
    };
    std::vector<Item> items{
        {"example1_osc1", oscillator1(example1(2.0), 1.0, 1.0), Grid{-15, 15, 4000}, 5, 1e-5},
        {"constant_osc1", oscillator1(constant_mass(), 1.0, 1.0), Grid{-12, 12, 4000}, 5, 1e-6},
        {"example3_osc1", oscillator1(example3(1.0), 1.0, 1.0), Grid{-400, 400, 8000}, 3, 1e-5},
        {"example4_morse", morse(example4(1.0), 1.0, 9.0, 1.0), Grid{0.0, 12.0, 4000}, 3, 1e-4},
    };
    for (const auto &it : items) {
      const Json j = oracle_fixture(it.name, it.system, it.grid, it.n_check, it.tol);
      write_atomic(dir / (it.name + ".json"), j.dump(2) + "\n");
      std::cout << "wrote " << (dir / (it.name + ".json")).string() << "\n";
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return 0;
}
