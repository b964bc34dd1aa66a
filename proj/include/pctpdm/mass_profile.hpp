#pragma once

// Mass profiles m(x) = M(x)/m0, their derivatives, and the scaled
// antiderivative mu(x) = (1/tau) * integral of sqrt(m).

#include <pctpdm/errors.hpp>
#include <pctpdm/expression.hpp>
#include <pctpdm/special_fn.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace pctpdm {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double x) const { return x > lo && x < hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double length() const { return hi - lo; }
};

struct ScaleParams {
  double tau = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;
  double xi = 1.0;
  double Z = 1.0;
};

struct MassProfile {
  std::string id;
  std::string mass_formula; // for display
  std::string mu_formula;   // empty when mu has no closed form
  RealFn m;
  RealFn dm;
  RealFn d2m;
  /// tau * mu(x) in closed form, when available.
  std::optional<RealFn> tau_mu_closed;
  Interval domain;
  std::map<std::string, double> params;
  /// tau * mu(anchor) == anchor_value.
  double anchor = 0.0;
  double anchor_value = 0.0;
  /// Interior points where m vanishes; excluded from every operative domain.
  std::vector<double> singular_points;

  double param(const std::string &name) const {
    auto it = params.find(name);
    if (it == params.end()) throw Error(ErrorKind::InvalidParams, id + ": no parameter " + name);
    return it->second;
  }
  bool has_closed_mu() const { return tau_mu_closed.has_value(); }
};

namespace detail {

inline void require_inside(const MassProfile &p, double x, const char *what) {
  if (!p.domain.contains(x)) {
    throw Error(ErrorKind::DomainViolation,
                std::string(what) + ": x = " + std::to_string(x) + " outside domain of " + p.id);
  }
}

/// Fourth-order central differences, step 1e-3 * max(1, |x|).
inline double fd_first(const RealFn &f, double x) {
  const double h = 1e-3 * std::max(1.0, std::abs(x));
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
inline double fd_second(const RealFn &f, double x) {
  const double h = 1e-3 * std::max(1.0, std::abs(x));
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12 * h * h);
}

/// log(cosh(t)) without overflow.
inline double log_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

} // namespace detail

/// mu by adaptive Simpson from the anchor, regardless of any closed form.
inline double mu_numeric(const MassProfile &p, double tau, double x, double tol = 1e-10) {
  detail::require_inside(p, x, "mu");
  if (!(tau > 0)) throw Error(ErrorKind::InvalidParams, "mu: tau must be positive");
  auto root_mass = [&](double t) { return std::sqrt(p.m(t)); };
  const double integral = adaptive_simpson(root_mass, p.anchor, x, tol * tau);
  return (p.anchor_value + integral) / tau;
}

inline double mu(const MassProfile &p, double tau, double x) {
  detail::require_inside(p, x, "mu");
  if (!(tau > 0)) throw Error(ErrorKind::InvalidParams, "mu: tau must be positive");
  if (p.tau_mu_closed) return (*p.tau_mu_closed)(x) / tau;
  return mu_numeric(p, tau, x);
}

/// Mass-induced potential common to every q = tau*mu map:
/// (1/8m) [m''/m - (7/4)(m'/m)^2].
inline double correction_term(const MassProfile &p, double x) {
  detail::require_inside(p, x, "correction_term");
  const double m = p.m(x);
  if (!(m > 0)) {
    throw Error(ErrorKind::SingularPoint, "correction_term: m(x) <= 0 at x = " + std::to_string(x));
  }
  const double r1 = p.dm(x) / m;
  const double r2 = p.d2m(x) / m;
  return (r2 - 1.75 * r1 * r1) / (8.0 * m);
}

// ---------------------------------------------------------------------------
// Built-in profiles

inline MassProfile constant_mass() {
  MassProfile p;
  p.id = "constant";
  p.mass_formula = "m = 1";
  p.mu_formula = "mu = x/tau";
  p.m = [](double) { return 1.0; };
  p.dm = [](double) { return 0.0; };
  p.d2m = [](double) { return 0.0; };
  p.tau_mu_closed = [](double x) { return x; };
  return p;
}

/// m = [(gamma + x^2)/(1 + x^2)]^2
inline MassProfile example1(double gamma = 2.0) {
  if (!(gamma > 0)) throw Error(ErrorKind::InvalidParams, "example1: gamma must be positive");
  MassProfile p;
  p.id = "example1";
  p.mass_formula = "m = [(gamma + x^2)/(1 + x^2)]^2";
  p.mu_formula = "mu = [x + (gamma - 1) atan(x)]/tau";
  p.params = {{"gamma", gamma}};
  auto s = [gamma](double x) { return (gamma + x * x) / (1.0 + x * x); };
  auto ds = [gamma](double x) {
    const double d = 1.0 + x * x;
    return 2.0 * x * (1.0 - gamma) / (d * d);
  };
  auto d2s = [gamma](double x) {
    const double d = 1.0 + x * x;
    return 2.0 * (1.0 - gamma) * (1.0 - 3.0 * x * x) / (d * d * d);
  };
  p.m = [s](double x) {
    const double v = s(x);
    return v * v;
  };
  p.dm = [s, ds](double x) { return 2.0 * s(x) * ds(x); };
  p.d2m = [s, ds, d2s](double x) {
    const double d = ds(x);
    return 2.0 * d * d + 2.0 * s(x) * d2s(x);
  };
  p.tau_mu_closed = [gamma](double x) { return x + (gamma - 1.0) * std::atan(x); };
  return p;
}

/// Smooth mass step m = 1 + tanh(gamma x). The closed mu is positive on the
/// whole line and tends to 0 as x -> -inf, so it is anchored at x = 0 with its
/// own value there.
inline MassProfile example2(double gamma = 1.0) {
  if (!(gamma > 0)) throw Error(ErrorKind::InvalidParams, "example2: gamma must be positive");
  MassProfile p;
  p.id = "example2";
  p.mass_formula = "m = 1 + tanh(gamma x)";
  p.mu_formula = "mu = (sqrt(2)/(tau gamma)) atanh(sqrt(1 + tanh(gamma x))/sqrt(2))";
  p.params = {{"gamma", gamma}};
  // 1 + tanh(g x) = 2/(1 + e^{-2 g x}),  1 - tanh(g x) = 2/(1 + e^{2 g x})
  auto one_plus = [gamma](double x) { return 2.0 / (1.0 + std::exp(-2.0 * gamma * x)); };
  auto one_minus = [gamma](double x) { return 2.0 / (1.0 + std::exp(2.0 * gamma * x)); };
  p.m = one_plus;
  p.dm = [gamma, one_plus, one_minus](double x) { return gamma * one_plus(x) * one_minus(x); };
  p.d2m = [gamma, one_plus, one_minus](double x) {
    const double sech2 = one_plus(x) * one_minus(x);
    return -2.0 * gamma * gamma * sech2 * std::tanh(gamma * x);
  };
  auto closed = [gamma, one_plus, one_minus](double x) {
    const double u = std::sqrt(0.5 * one_plus(x));
    const double one_minus_u = 0.5 * one_minus(x) / (1.0 + u);
    const double atanh_u = 0.5 * (std::log1p(u) - std::log(one_minus_u));
    return std::numbers::sqrt2 / gamma * atanh_u;
  };
  p.tau_mu_closed = closed;
  p.anchor = 0.0;
  p.anchor_value = closed(0.0);
  return p;
}

/// Asymptotically vanishing mass m = 1/(gamma + x^2); closed mu is
/// ln(x + sqrt(gamma + x^2))/tau, which is ln(sqrt(gamma))/tau at x = 0.
inline MassProfile example3(double gamma = 1.0) {
  if (!(gamma > 0)) throw Error(ErrorKind::InvalidParams, "example3: gamma must be positive");
  MassProfile p;
  p.id = "example3";
  p.mass_formula = "m = 1/(gamma + x^2)";
  p.mu_formula = "mu = ln(x + sqrt(gamma + x^2))/tau";
  p.params = {{"gamma", gamma}};
  p.m = [gamma](double x) { return 1.0 / (gamma + x * x); };
  p.dm = [gamma](double x) {
    const double d = gamma + x * x;
    return -2.0 * x / (d * d);
  };
  p.d2m = [gamma](double x) {
    const double d = gamma + x * x;
    return (6.0 * x * x - 2.0 * gamma) / (d * d * d);
  };
  const double sg = std::sqrt(gamma);
  p.tau_mu_closed = [sg](double x) { return std::asinh(x / sg) + std::log(sg); };
  p.anchor = 0.0;
  p.anchor_value = std::log(sg);
  return p;
}

/// m = tanh(lambda x)^2, vanishing at x = 0. mu is taken odd,
/// sign(x) ln(cosh(lambda x))/(lambda tau), so that it increases on the whole
/// line; for x > 0 it is the usual ln cosh form.
inline MassProfile example4(double lambda = 1.0) {
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidParams, "example4: lambda must be positive");
  MassProfile p;
  p.id = "example4";
  p.mass_formula = "m = tanh(lambda x)^2";
  p.mu_formula = "mu = ln(cosh(lambda x))/(lambda tau)  (x > 0; odd extension)";
  p.params = {{"lambda", lambda}};
  p.m = [lambda](double x) {
    const double t = std::tanh(lambda * x);
    return t * t;
  };
  p.dm = [lambda](double x) {
    const double t = std::tanh(lambda * x);
    return 2.0 * lambda * t * (1.0 - t * t);
  };
  p.d2m = [lambda](double x) {
    const double t = std::tanh(lambda * x);
    const double sech2 = 1.0 - t * t;
    return 2.0 * lambda * lambda * sech2 * (sech2 - 2.0 * t * t);
  };
  p.tau_mu_closed = [lambda](double x) {
    return std::copysign(detail::log_cosh(lambda * x), x) / lambda;
  };
  p.singular_points = {0.0};
  return p;
}

/// Radial power-law mass m(r) = alpha r^gamma on r > 0. Anchored at r = 1 so
/// the numeric mu never touches the r = 0 endpoint.
inline MassProfile powerlaw_mass(double alpha, double gamma) {
  if (!(alpha > 0)) throw Error(ErrorKind::InvalidParams, "powerlaw: alpha must be positive");
  MassProfile p;
  p.id = "powerlaw";
  p.mass_formula = "m = alpha r^gamma";
  p.params = {{"alpha", alpha}, {"gamma", gamma}};
  p.domain = {0.0, kInf};
  p.m = [alpha, gamma](double r) { return alpha * std::pow(r, gamma); };
  p.dm = [alpha, gamma](double r) { return alpha * gamma * std::pow(r, gamma - 1.0); };
  p.d2m = [alpha, gamma](double r) {
    return alpha * gamma * (gamma - 1.0) * std::pow(r, gamma - 2.0);
  };
  const double sa = std::sqrt(alpha);
  if (gamma == -2.0) {
    p.mu_formula = "mu = sqrt(alpha) ln(r)/tau";
    p.tau_mu_closed = [sa](double r) { return sa * std::log(r); };
  } else {
    const double nu = 1.0 + 0.5 * gamma;
    p.mu_formula = "mu = sqrt(alpha) r^(1 + gamma/2)/((1 + gamma/2) tau)";
    p.tau_mu_closed = [sa, nu](double r) { return sa * std::pow(r, nu) / nu; };
  }
  p.anchor = 1.0;
  p.anchor_value = (*p.tau_mu_closed)(1.0);
  return p;
}

inline std::vector<MassProfile> catalog() {
  return {constant_mass(), example1(), example2(), example3(), example4()};
}

inline std::vector<std::string> catalog_ids() {
  return {"constant", "example1", "example2", "example3", "example4"};
}

/// Build a catalog profile by id with parameter overrides.
inline MassProfile make_profile(const std::string &id,
                                const std::map<std::string, double> &overrides = {}) {
  auto get = [&](const std::string &name, double fallback) {
    auto it = overrides.find(name);
    return it == overrides.end() ? fallback : it->second;
  };
  auto check_keys = [&](std::initializer_list<const char *> allowed) {
    for (const auto &[k, v] : overrides) {
      bool ok = false;
      for (const char *a : allowed) ok = ok || k == a;
      if (!ok) throw Error(ErrorKind::InvalidParams, id + ": unknown parameter " + k);
    }
  };
  if (id == "constant") {
    check_keys({});
    return constant_mass();
  }
  if (id == "example1") {
    check_keys({"gamma"});
    return example1(get("gamma", 2.0));
  }
  if (id == "example2") {
    check_keys({"gamma"});
    return example2(get("gamma", 1.0));
  }
  if (id == "example3") {
    check_keys({"gamma"});
    return example3(get("gamma", 1.0));
  }
  if (id == "example4") {
    check_keys({"lambda"});
    return example4(get("lambda", 1.0));
  }
  throw Error(ErrorKind::UnknownProfile, "unknown profile '" + id + "'");
}

/// Profile from expression strings. `mass` is required; derivatives fall back
/// to fourth-order central differences (step 1e-3 max(1,|x|)) when absent,
/// and `tau_mu` (the antiderivative of sqrt(m)) is optional.
struct ExpressionProfileSpec {
  std::string id;
  std::string mass;
  std::optional<std::string> dmass;
  std::optional<std::string> d2mass;
  std::optional<std::string> tau_mu;
  std::map<std::string, double> params;
  Interval domain;
  double anchor = 0.0;
  double anchor_value = 0.0;
};

inline MassProfile expression_profile(const ExpressionProfileSpec &spec) {
  MassProfile p;
  p.id = spec.id;
  p.params = spec.params;
  p.domain = spec.domain;
  p.anchor = spec.anchor;
  p.anchor_value = spec.anchor_value;
  p.mass_formula = "m = " + spec.mass;
  auto m = Expression::parse(spec.mass, spec.params);
  p.m = m;
  if (spec.dmass) p.dm = Expression::parse(*spec.dmass, spec.params);
  else p.dm = [m](double x) { return detail::fd_first(m, x); };
  if (spec.d2mass) p.d2m = Expression::parse(*spec.d2mass, spec.params);
  else p.d2m = [m](double x) { return detail::fd_second(m, x); };
  if (spec.tau_mu) {
    p.tau_mu_closed = Expression::parse(*spec.tau_mu, spec.params);
    p.mu_formula = "mu = (" + *spec.tau_mu + ")/tau";
  }
  if (!p.domain.contains(p.anchor)) {
    throw Error(ErrorKind::InvalidParams, spec.id + ": anchor outside domain");
  }
  return p;
}

} // namespace pctpdm
