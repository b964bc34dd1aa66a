#pragma once

// Command implementations behind the pct_pdm tool. Each command writes its
// human-readable table to `out`, diagnostics to `err`, and returns the exit
// code: 0 success, 1 verification mismatch, 2 invalid input, 3 solver or
// domain failure.

#include <pctpdm/eigensolver.hpp>
#include <pctpdm/mass_profile.hpp>
#include <pctpdm/pct_maps.hpp>
#include <pctpdm/radial3d.hpp>
#include <pctpdm/report_json.hpp>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace pctpdm {

enum class Command { Profiles, Solve, Verify, Sample };
enum class Format { JSON, CSV };

struct RunConfig {
  Command command = Command::Profiles;
  std::string profile_id = "constant";
  std::optional<std::string> profile_file;
  std::optional<std::string> id_filter; // profiles --id
  std::string class_tag;
  std::optional<double> alpha, tau, lambda, xi, C, gamma, mass_alpha;
  std::optional<int> ell;
  std::map<std::string, double> profile_params; // --param k=v
  std::optional<Grid> grid;
  bool log_grid = false;
  std::optional<int> nmax;
  int n_check = 5;
  double tol = 1e-6;
  int n = 0;
  std::optional<std::string> output;
  Format format = Format::JSON;
  bool timestamp = true;
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
  case ErrorKind::EmptyDomain:
  case ErrorKind::SingularMass:
  case ErrorKind::ConvergenceFailure:
  case ErrorKind::IntegrationFailure:
  case ErrorKind::NonFiniteIntegrand:
  case ErrorKind::NonNormalizable:
  case ErrorKind::SingularPoint: return 3;
  default: return 2;
  }
}

/// "a:b:N" with a, b possibly "inf"/"-inf"-free finite reals.
inline Grid parse_grid(const std::string &text, bool log_grid) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ':')) parts.push_back(piece);
  if (parts.size() != 3) throw Error(ErrorKind::InvalidGrid, "grid must be a:b:N, got '" + text + "'");
  Grid g;
  try {
    std::size_t used = 0;
    g.a = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("a");
    g.b = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("b");
    g.N = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("N");
  } catch (const std::logic_error &) {
    throw Error(ErrorKind::InvalidGrid, "grid must be a:b:N with numbers, got '" + text + "'");
  }
  g.coordinate = log_grid ? Coordinate::Log : Coordinate::Linear;
  g.validate();
  return g;
}

/// Directory holding regression fixtures; PCT_PDM_FIXTURES overrides the
/// fallback.
inline std::filesystem::path fixture_dir(const std::filesystem::path &fallback) {
  if (const char *env = std::getenv("PCT_PDM_FIXTURES"); env && *env) return env;
  return fallback;
}

/// Write via a temporary file in the same directory, then rename.
inline void write_atomic(const std::filesystem::path &path, const std::string &content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!dir.empty() && !fs::exists(dir)) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::InvalidParams, "cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw Error(ErrorKind::InvalidParams, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

struct BuiltSystem {
  TargetSystem system;
  std::optional<RadialSystem> radial;
};

namespace detail {

inline bool is_radial(const std::string &tag) {
  return tag == "radial-a" || tag == "radial-b" || tag == "radial-log";
}

inline MassProfile resolve_profile(const RunConfig &cfg) {
  if (cfg.profile_file) return load_profile_file(*cfg.profile_file);
  std::map<std::string, double> params = cfg.profile_params;
  const std::string &id = cfg.profile_id;
  if (cfg.gamma && (id == "example1" || id == "example2" || id == "example3"))
    params.try_emplace("gamma", *cfg.gamma);
  if (cfg.lambda && id == "example4") params.try_emplace("lambda", *cfg.lambda);
  return make_profile(id, params);
}

inline double need(const std::optional<double> &v, const char *flag, const std::string &cls) {
  if (!v) throw Error(ErrorKind::InvalidParams, std::string("class ") + cls + " requires " + flag);
  if (!std::isfinite(*v)) throw Error(ErrorKind::InvalidParams, std::string(flag) + " must be finite");
  return *v;
}

inline void validate_common(const RunConfig &cfg) {
  if (cfg.nmax && *cfg.nmax < 0) throw Error(ErrorKind::InvalidParams, "--nmax must be >= 0");
  if (cfg.n_check < 0) throw Error(ErrorKind::InvalidParams, "--ncheck must be >= 0");
  if (!(cfg.tol > 0)) throw Error(ErrorKind::InvalidParams, "--tol must be positive");
  if (cfg.n < 0) throw Error(ErrorKind::InvalidParams, "--n must be >= 0");
  if (cfg.class_tag.empty()) throw Error(ErrorKind::InvalidParams, "--class is required");
  if (!parse_class_tag(cfg.class_tag)) {
    throw Error(ErrorKind::InvalidParams,
                "unknown class '" + cfg.class_tag +
                    "' (expected osc1, osc2, cou1, cou2, morse, radial-a, radial-b, radial-log)");
  }
}

} // namespace detail

/// Validates the configuration and builds the requested system.
inline BuiltSystem build_system(const RunConfig &cfg) {
  detail::validate_common(cfg);
  const std::string &c = cfg.class_tag;
  BuiltSystem out;
  if (detail::is_radial(c)) {
    const double ma = cfg.mass_alpha.value_or(1.0);
    const double C = cfg.C.value_or(1.0);
    const int ell = cfg.ell.value_or(0);
    if (c == "radial-log") {
      if (cfg.grid && cfg.grid->coordinate != Coordinate::Log) {
        throw Error(ErrorKind::InvalidGrid, "radial-log needs --log-grid");
      }
      out.radial = powerlaw_singular(ma, C, ell);
    } else {
      const double g = detail::need(cfg.gamma, "--gamma", c);
      out.radial = c == "radial-a" ? powerlaw_case_a(ma, g, C, ell) : powerlaw_case_b(ma, g, C, ell);
    }
    out.system = out.radial->system;
    return out;
  }
  if (cfg.grid && cfg.grid->coordinate == Coordinate::Log) {
    throw Error(ErrorKind::InvalidGrid, "--log-grid applies to radial classes only");
  }
  const MassProfile p = detail::resolve_profile(cfg);
  const double tau = cfg.tau.value_or(1.0);
  if (c == "osc1") out.system = oscillator1(p, cfg.alpha.value_or(1.0), tau);
  else if (c == "osc2") out.system = oscillator2(p, tau);
  else if (c == "cou1") out.system = coulomb1(p, cfg.alpha.value_or(1.0), tau);
  else if (c == "cou2") out.system = coulomb2(p, tau);
  else out.system = morse(p, cfg.lambda.value_or(1.0), detail::need(cfg.xi, "--xi", c), tau);
  return out;
}

inline int default_nmax(const TargetSystem &s) { return s.n_range.max ? *s.n_range.max : 5; }

namespace detail {

inline Json system_json(const BuiltSystem &b) {
  const TargetSystem &s = b.system;
  Json j;
  j["class"] = to_string(s.tag);
  j["profile"] = s.profile_id;
  j["params"] = params_json(s.params);
  j["profile_params"] = params_json(s.profile.params);
  j["operative_domain"] = interval_json(s.operative_domain);
  j["singular_points"] = s.singular_points;
  j["n_range"] = {{"min", s.n_range.min}, {"max", s.n_range.max ? Json(*s.n_range.max) : Json("unbounded")}};
  j["n_max_candidates"] = s.n_max_candidates;
  if (b.radial) {
    const auto &r = *b.radial;
    j["radial"] = {{"case", to_string(r.case_tag)}, {"ell", r.ell},     {"Lambda", r.Lambda},
                   {"gamma", r.gamma},              {"alpha", r.alpha}, {"C", r.C},
                   {"xi_scale", num(r.xi_scale)}};
  }
  return j;
}

inline void emit(const RunConfig &cfg, const std::string &content, std::ostream &out) {
  if (cfg.output) write_atomic(*cfg.output, content);
  else out << content;
}

inline double safe_eval(const std::function<double()> &f) {
  try {
    return f();
  } catch (const Error &) {
    return std::nan("");
  }
}

} // namespace detail

inline int cmd_profiles(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  std::vector<MassProfile> list;
  if (cfg.profile_file) {
    try {
      list.push_back(load_profile_file(*cfg.profile_file));
    } catch (const Error &e) {
      fmt::print(err, "error: {}\n", e.what());
      return exit_code_for(e.kind());
    }
  } else {
    list = catalog();
  }
  if (cfg.id_filter) {
    std::vector<MassProfile> keep;
    for (auto &p : list)
      if (p.id == *cfg.id_filter) keep.push_back(p);
    if (keep.empty()) {
      fmt::print(err, "error: unknown profile '{}'\n", *cfg.id_filter);
      return 2;
    }
    list = keep;
  }
  if (cfg.output) {
    Json j{{"schema", kSchema}, {"kind", "profiles"}, {"profiles", Json::array()}};
    for (const auto &p : list) j["profiles"].push_back(profile_json(p));
    if (cfg.timestamp) j["generated_at"] = utc_timestamp();
    write_atomic(*cfg.output, j.dump(2) + "\n");
  }
  fmt::print(out, "{:<10} {:<34} {:<58} {:<16} {}\n", "id", "mass", "mu", "params", "domain");
  for (const auto &p : list) {
    std::string params;
    for (const auto &[k, v] : p.params) params += fmt::format("{}{}={}", params.empty() ? "" : ",", k, v);
    const std::string dom = fmt::format("({}, {})", p.domain.lo, p.domain.hi);
    fmt::print(out, "{:<10} {:<34} {:<58} {:<16} {}\n", p.id, p.mass_formula,
               p.has_closed_mu() ? p.mu_formula : "numeric", params.empty() ? "-" : params, dom);
  }
  return 0;
}

inline int cmd_solve(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    const BuiltSystem b = build_system(cfg);
    const TargetSystem &s = b.system;
    const int nmax = cfg.nmax.value_or(default_nmax(s));
    Grid g = cfg.grid ? *cfg.grid : default_grid(s, std::min(nmax, 10), 200);
    std::vector<std::pair<int, double>> levels;
    for (int n = 0; n <= nmax; ++n)
      if (s.n_range.contains(n)) levels.emplace_back(n, s.E(n));
    std::vector<std::pair<double, double>> samples;
    for (double x : g.nodes()) samples.emplace_back(x, detail::safe_eval([&] { return s.V(x); }));

    std::string content;
    if (cfg.format == Format::JSON) {
      Json j = detail::system_json(b);
      j["schema"] = kSchema;
      j["kind"] = "solve";
      j["levels"] = Json::array();
      for (const auto &[n, E] : levels) j["levels"].push_back({{"n", n}, {"E", num(E)}});
      j["candidates"] = Json::array();
      for (const auto &c : s.candidates) {
        Json cj{{"label", c.label}, {"levels", Json::array()}};
        for (const auto &[n, E] : levels) cj["levels"].push_back({{"n", n}, {"E", num(c.E(n))}});
        j["candidates"].push_back(cj);
      }
      j["potential_samples"] = Json::array();
      for (const auto &[x, V] : samples) j["potential_samples"].push_back({{"x", x}, {"V", num(V)}});
      if (cfg.timestamp) j["generated_at"] = utc_timestamp();
      content = j.dump(2) + "\n";
    } else {
      std::string csv;
      if (cfg.timestamp) csv += "# generated_at=" + utc_timestamp() + "\n";
      csv += "kind,label,n,x,value\n";
      for (const auto &c : s.candidates)
        for (const auto &[n, E] : levels) csv += fmt::format("level,{},{},,{}\n", c.label, n, fmt_num(c.E(n)));
      for (const auto &[x, V] : samples) csv += fmt::format("potential,,,{},{}\n", fmt_num(x), fmt_num(V));
      content = csv;
    }
    if (cfg.output) {
      write_atomic(*cfg.output, content);
      fmt::print(out, "class {} profile {}\n{:>4} {:>24}\n", to_string(s.tag), s.profile_id, "n", "E");
      for (const auto &[n, E] : levels) fmt::print(out, "{:>4} {:>24.15g}\n", n, E);
      for (const auto &[k, v] : s.n_max_candidates) fmt::print(out, "n_max[{}] = {}\n", k, v);
    } else {
      out << content;
    }
    return 0;
  } catch (const Error &e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e.kind());
  }
}

inline int cmd_verify(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    const BuiltSystem b = build_system(cfg);
    const TargetSystem &s = b.system;
    const Grid g = cfg.grid ? *cfg.grid : default_grid(s, cfg.n_check, 4000);
    const SpectrumReport rep = verify(s, g, cfg.n_check, cfg.tol);
    const auto issues = check_report_consistency(rep);
    for (const auto &i : issues) fmt::print(err, "warning: report inconsistency: {}\n", i);

    std::string content;
    if (cfg.format == Format::JSON) {
      Json j = report_json(rep);
      j["system"] = detail::system_json(b);
      if (cfg.timestamp) j["generated_at"] = utc_timestamp();
      content = j.dump(2) + "\n";
    } else {
      if (cfg.timestamp) content += "# generated_at=" + utc_timestamp() + "\n";
      content += "candidate,n,E_analytic,E_numeric,abs_err,rel_err,overlap,residual,region,within_tol\n";
      for (const auto &c : rep.candidates) {
        for (const auto &p : c.pairs) {
          content += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", c.label, p.n, fmt_num(p.E_analytic),
                                 fmt_num(p.E_numeric), fmt_num(p.abs_err), fmt_num(p.rel_err),
                                 fmt_num(p.overlap), fmt_num(p.residual), p.region, p.within_tol ? 1 : 0);
        }
        for (std::size_t i = 0; i < c.unmatched_analytic.size(); ++i) {
          content += fmt::format("{},{},{},,,,,,,0\n", c.label, c.unmatched_analytic[i],
                                 fmt_num(c.unmatched_analytic_values[i]));
        }
      }
    }
    if (cfg.output) write_atomic(*cfg.output, content);

    fmt::print(out, "class {} profile {} grid [{}, {}] N={} ({})\n", rep.class_tag, rep.profile_id, g.a,
               g.b, g.N, to_string(g.coordinate));
    for (const auto &c : rep.candidates) {
      fmt::print(out, "candidate {}{}\n", c.label, &c == &rep.candidates.front() ? " (published)" : "");
      fmt::print(out, "{:>4} {:>22} {:>22} {:>10} {:>14}\n", "n", "E_analytic", "E_numeric", "rel_err",
                 "overlap");
      for (const auto &p : c.pairs) {
        fmt::print(out, "{:>4} {:>22.14g} {:>22.14g} {:>10.2e} {:>14.10f}\n", p.n, p.E_analytic,
                   p.E_numeric, p.rel_err, p.overlap);
      }
      for (std::size_t i = 0; i < c.unmatched_analytic.size(); ++i) {
        fmt::print(out, "{:>4} {:>22.14g} {:>22} (unmatched)\n", c.unmatched_analytic[i],
                   c.unmatched_analytic_values[i], "-");
      }
    }
    for (const auto &o : rep.offsets) {
      fmt::print(out, "region {}: {} (offset mean {:.10g}, spread {:.3e})\n", o.region, o.classification,
                 o.offset_mean, o.offset_spread);
    }
    return rep.all_matched() ? 0 : 1;
  } catch (const Error &e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e.kind());
  }
}

inline int cmd_sample(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    const BuiltSystem b = build_system(cfg);
    const TargetSystem &s = b.system;
    if (!s.n_range.contains(cfg.n)) {
      throw Error(ErrorKind::InvalidParams, "--n " + std::to_string(cfg.n) + " outside the valid range");
    }
    const Grid g = cfg.grid ? *cfg.grid : default_grid(s, cfg.n, 400);
    const double A = norm_constant(s, cfg.n);
    const double tau = s.params.count("tau") ? s.params.at("tau") : 1.0;
    struct Row {
      double x, m, mu, V, phi;
    };
    std::vector<Row> rows;
    for (double x : g.nodes()) {
      Row r{x, s.profile.m(x), detail::safe_eval([&] { return mu(s.profile, tau, x); }),
            detail::safe_eval([&] { return s.V(x); }), detail::safe_eval([&] { return A * s.phi(cfg.n, x); })};
      rows.push_back(r);
    }
    std::string content;
    if (cfg.format == Format::CSV) {
      if (cfg.timestamp) content += "# generated_at=" + utc_timestamp() + "\n";
      content += "x,m,mu,V,phi\n";
      for (const auto &r : rows) {
        content += fmt::format("{},{},{},{},{}\n", fmt_num(r.x), fmt_num(r.m), fmt_num(r.mu), fmt_num(r.V),
                               fmt_num(r.phi));
      }
    } else {
      Json j = detail::system_json(b);
      j["schema"] = kSchema;
      j["kind"] = "sample";
      j["n"] = cfg.n;
      j["normalization"] = A;
      j["grid"] = grid_json(g);
      j["samples"] = Json::array();
      for (const auto &r : rows) {
        j["samples"].push_back({{"x", r.x}, {"m", num(r.m)}, {"mu", num(r.mu)}, {"V", num(r.V)}, {"phi", num(r.phi)}});
      }
      if (cfg.timestamp) j["generated_at"] = utc_timestamp();
      content = j.dump(2) + "\n";
    }
    detail::emit(cfg, content, out);
    return 0;
  } catch (const Error &e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e.kind());
  }
}

inline int run(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  switch (cfg.command) {
  case Command::Profiles: return cmd_profiles(cfg, out, err);
  case Command::Solve: return cmd_solve(cfg, out, err);
  case Command::Verify: return cmd_verify(cfg, out, err);
  case Command::Sample: return cmd_sample(cfg, out, err);
  }
  return 2;
}

} // namespace pctpdm
