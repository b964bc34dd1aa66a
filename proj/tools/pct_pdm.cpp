// pct_pdm: list mass profiles, build target systems, check them against the
// finite-difference oracle, and export samples.

#include <pctpdm/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using pctpdm::RunConfig;

struct Flags {
  std::string grid;
  std::string format = "json";
  std::vector<std::string> params;
};

void add_system_flags(CLI::App *cmd, RunConfig &cfg, Flags &flags) {
  cmd->add_option("--class", cfg.class_tag,
                  "osc1 | osc2 | cou1 | cou2 | morse | radial-a | radial-b | radial-log");
  cmd->add_option("--profile", cfg.profile_id, "catalog profile id");
  cmd->add_option("--profile-file", cfg.profile_file, "JSON profile definition");
  cmd->add_option("--param", flags.params, "profile parameter override k=v (repeatable)");
  cmd->add_option("--alpha", cfg.alpha, "coupling alpha (osc1, cou1)");
  cmd->add_option("--tau", cfg.tau, "length scale tau");
  cmd->add_option("--lambda", cfg.lambda, "Morse lambda (also the example4 profile parameter)");
  cmd->add_option("--xi", cfg.xi, "Morse xi");
  cmd->add_option("--gamma", cfg.gamma, "profile gamma, or the radial mass power");
  cmd->add_option("--C", cfg.C, "radial potential coupling C");
  cmd->add_option("--ell", cfg.ell, "angular momentum l (radial)");
  cmd->add_option("--mass-alpha", cfg.mass_alpha, "radial mass amplitude alpha");
  cmd->add_option("--grid", flags.grid, "oracle grid a:b:N");
  cmd->add_flag("--log-grid", cfg.log_grid, "use a grid uniform in ln r (radial)");
  cmd->add_option("-o,--output", cfg.output, "output file (written atomically)");
  cmd->add_option("--format", flags.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--no-timestamp", [&cfg](std::int64_t) { cfg.timestamp = false; },
                "omit the generation timestamp");
}

void finalize(RunConfig &cfg, const Flags &flags) {
  cfg.format = flags.format == "csv" ? pctpdm::Format::CSV : pctpdm::Format::JSON;
  for (const auto &kv : flags.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw pctpdm::Error(pctpdm::ErrorKind::InvalidParams, "--param expects k=v, got '" + kv + "'");
    }
    std::size_t used = 0;
    const std::string value = kv.substr(eq + 1);
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::logic_error &) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw pctpdm::Error(pctpdm::ErrorKind::InvalidParams, "--param value not a number: '" + kv + "'");
    }
    cfg.profile_params[kv.substr(0, eq)] = v;
  }
  if (!flags.grid.empty()) cfg.grid = pctpdm::parse_grid(flags.grid, cfg.log_grid);
  else if (cfg.log_grid && cfg.class_tag.rfind("radial", 0) != 0) {
    throw pctpdm::Error(pctpdm::ErrorKind::InvalidGrid, "--log-grid applies to radial classes only");
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Exactly solvable position-dependent-mass systems and their numerical check"};
  app.require_subcommand(1);

  RunConfig cfg;
  Flags flags;

  auto *profiles = app.add_subcommand("profiles", "list mass profiles");
  profiles->add_option("--id", cfg.id_filter, "show one profile");
  profiles->add_option("--profile-file", cfg.profile_file, "JSON profile definition");
  profiles->add_option("-o,--output", cfg.output, "also write the list as JSON");
  profiles->add_flag("--no-timestamp", [&cfg](std::int64_t) { cfg.timestamp = false; },
                     "omit the generation timestamp");

  auto *solve = app.add_subcommand("solve", "potential and spectrum of a target system");
  add_system_flags(solve, cfg, flags);
  solve->add_option("--nmax", cfg.nmax, "highest level to list");

  auto *verify = app.add_subcommand("verify", "compare the spectrum with the finite-difference oracle");
  add_system_flags(verify, cfg, flags);
  verify->add_option("--ncheck", cfg.n_check, "levels 0..ncheck are checked");
  verify->add_option("--tol", cfg.tol, "relative tolerance");

  auto *sample = app.add_subcommand("sample", "normalized wavefunction samples");
  add_system_flags(sample, cfg, flags);
  sample->add_option("--n", cfg.n, "state index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*profiles) cfg.command = pctpdm::Command::Profiles;
  else if (*solve) cfg.command = pctpdm::Command::Solve;
  else if (*verify) cfg.command = pctpdm::Command::Verify;
  else cfg.command = pctpdm::Command::Sample;

  try {
    if (cfg.command != pctpdm::Command::Profiles) finalize(cfg, flags);
  } catch (const pctpdm::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return pctpdm::exit_code_for(e.kind());
  }
  return pctpdm::run(cfg, std::cout, std::cerr);
}
