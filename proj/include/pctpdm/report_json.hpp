#pragma once

// JSON forms of profiles, systems and spectrum reports ("pct-pdm/1").

#include <pctpdm/eigensolver.hpp>
#include <pctpdm/mass_profile.hpp>
#include <pctpdm/pct_maps.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>

namespace pctpdm {

using Json = nlohmann::json;

inline constexpr const char *kSchema = "pct-pdm/1";

/// Non-finite numbers become the strings "inf", "-inf" and "nan".
inline Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double parse_num(const Json &j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw Error(ErrorKind::InvalidParams, "expected a number, got " + j.dump());
}

inline Json params_json(const std::map<std::string, double> &p) {
  Json j = Json::object();
  for (const auto &[k, v] : p) j[k] = num(v);
  return j;
}

inline Json interval_json(const Interval &d) { return Json::array({num(d.lo), num(d.hi)}); }

inline Json profile_json(const MassProfile &p) {
  return {{"id", p.id},
          {"mass", p.mass_formula},
          {"mu", p.mu_formula},
          {"mu_closed_form", p.has_closed_mu()},
          {"params", params_json(p.params)},
          {"domain", interval_json(p.domain)},
          {"anchor", p.anchor},
          {"anchor_value", p.anchor_value},
          {"singular_points", p.singular_points}};
}

inline Json grid_json(const Grid &g) {
  return {{"a", g.a}, {"b", g.b}, {"N", g.N}, {"h", g.h()}, {"coordinate", to_string(g.coordinate)}};
}

inline Json pair_json(const PairReport &p) {
  return {{"n", p.n},
          {"E_analytic", num(p.E_analytic)},
          {"E_numeric", num(p.E_numeric)},
          {"E_numeric_raw", num(p.E_numeric_raw)},
          {"abs_err", num(p.abs_err)},
          {"rel_err", num(p.rel_err)},
          {"overlap", num(p.overlap)},
          {"residual", num(p.residual)},
          {"region", p.region},
          {"numeric_index", p.numeric_index},
          {"analytic_nodes", p.analytic_nodes},
          {"numeric_nodes", p.numeric_nodes},
          {"err_N", num(p.err_N)},
          {"err_2N", num(p.err_2N)},
          {"convergence_ratio", num(p.convergence_ratio)},
          {"within_tol", p.within_tol}};
}

inline Json report_json(const SpectrumReport &r) {
  Json j;
  j["schema"] = kSchema;
  j["kind"] = "spectrum_report";
  j["class"] = r.class_tag;
  j["profile"] = r.profile_id;
  j["params"] = params_json(r.params);
  j["grid"] = grid_json(r.grid);
  j["n_check"] = r.n_check;
  j["tol"] = r.tol;
  j["pairs"] = Json::array();
  for (const auto &p : r.pairs()) j["pairs"].push_back(pair_json(p));
  j["unmatched_numeric"] = Json::array();
  for (double v : r.unmatched_numeric) j["unmatched_numeric"].push_back(num(v));
  j["all_matched"] = r.all_matched();
  Json cands = Json::array();
  for (const auto &c : r.candidates) {
    Json cj{{"label", c.label}, {"all_matched", c.all_matched}};
    cj["pairs"] = Json::array();
    for (const auto &p : c.pairs) cj["pairs"].push_back(pair_json(p));
    cj["unmatched_analytic"] = Json::array();
    for (std::size_t i = 0; i < c.unmatched_analytic.size(); ++i) {
      cj["unmatched_analytic"].push_back(
          {{"n", c.unmatched_analytic[i]}, {"E", num(c.unmatched_analytic_values[i])}});
    }
    cands.push_back(cj);
  }
  j["candidates"] = cands;
  Json sup = Json::object();
  for (const auto &[n, labels] : r.supported_by) sup[std::to_string(n)] = labels;
  j["supported_by"] = sup;
  Json regions = Json::array();
  for (const auto &reg : r.regions) {
    Json rj{{"grid", grid_json(reg.grid)}, {"edge_potential", num(reg.edge_potential)}};
    rj["numeric"] = Json::array();
    rj["numeric_raw"] = Json::array();
    for (double v : reg.numeric) rj["numeric"].push_back(num(v));
    for (double v : reg.numeric_raw) rj["numeric_raw"].push_back(num(v));
    rj["bound"] = reg.bound;
    regions.push_back(rj);
  }
  j["regions"] = regions;
  Json conv = Json::array();
  for (const auto &c : r.convergence) {
    conv.push_back({{"region", c.region},
                    {"index", c.index},
                    {"E_N", num(c.E_N)},
                    {"E_2N", num(c.E_2N)},
                    {"E_4N", num(c.E_4N)},
                    {"E_extrapolated", num(c.E_extrapolated)},
                    {"err_N", num(c.err_N)},
                    {"err_2N", num(c.err_2N)},
                    {"ratio", num(c.ratio)},
                    {"observed_order", num(c.observed_order)}});
  }
  j["convergence"] = conv;
  Json offs = Json::array();
  for (const auto &o : r.offsets) {
    Json oj{{"region", o.region},
            {"classification", o.classification},
            {"offset_mean", num(o.offset_mean)},
            {"offset_spread", num(o.offset_spread)},
            {"ratio_mean", num(o.ratio_mean)},
            {"ratio_spread", num(o.ratio_spread)}};
    auto arr = [](const std::vector<double> &v) {
      Json a = Json::array();
      for (double x : v) a.push_back(num(x));
      return a;
    };
    oj["offsets"] = arr(o.offsets);
    oj["ratios"] = arr(o.ratios);
    oj["numeric_spacings"] = arr(o.numeric_spacings);
    oj["analytic_spacings"] = arr(o.analytic_spacings);
    offs.push_back(oj);
  }
  j["offset_analysis"] = offs;
  j["n_max_candidates"] = r.n_max_candidates;
  j["metadata"] = r.metadata;
  return j;
}

// ---------------------------------------------------------------------------
// Profile definition files
//
// Catalog entry:  {"id": "example1", "params": {"gamma": 3}, "domain": [a, b]}
// User profile:   {"id": "mine", "mass": "1 + x^2/(k + x^2)", "params": {"k": 2},
//                  "dmass": "...", "d2mass": "...", "tau_mu": "...",
//                  "domain": ["-inf", "inf"], "anchor": 0, "anchor_value": 0}

inline MassProfile profile_from_json(const Json &j) {
  if (!j.is_object() || !j.contains("id")) {
    throw Error(ErrorKind::InvalidParams, "profile file needs an object with an \"id\"");
  }
  std::map<std::string, double> params;
  if (j.contains("params")) {
    for (const auto &[k, v] : j.at("params").items()) params[k] = parse_num(v);
  }
  std::optional<Interval> domain;
  if (j.contains("domain")) {
    const auto &d = j.at("domain");
    if (!d.is_array() || d.size() != 2) throw Error(ErrorKind::InvalidParams, "domain must be [a, b]");
    domain = Interval{parse_num(d[0]), parse_num(d[1])};
    if (!(domain->hi > domain->lo)) throw Error(ErrorKind::InvalidParams, "domain needs a < b");
  }
  const std::string id = j.at("id").get<std::string>();
  MassProfile p;
  if (j.contains("mass")) {
    ExpressionProfileSpec spec;
    spec.id = id;
    spec.mass = j.at("mass").get<std::string>();
    if (j.contains("dmass")) spec.dmass = j.at("dmass").get<std::string>();
    if (j.contains("d2mass")) spec.d2mass = j.at("d2mass").get<std::string>();
    if (j.contains("tau_mu")) spec.tau_mu = j.at("tau_mu").get<std::string>();
    spec.params = params;
    if (domain) spec.domain = *domain;
    if (j.contains("anchor")) spec.anchor = parse_num(j.at("anchor"));
    if (j.contains("anchor_value")) spec.anchor_value = parse_num(j.at("anchor_value"));
    p = expression_profile(spec);
  } else {
    p = make_profile(id, params);
    if (domain) p.domain = *domain;
  }
  return p;
}

inline MassProfile load_profile_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidParams, "cannot open profile file " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error &e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return profile_from_json(j);
}

} // namespace pctpdm
