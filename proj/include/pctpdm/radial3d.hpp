#pragma once

// Radial problems with a power-law mass m(r) = alpha r^gamma, mapped from the
// 3D isotropic oscillator by q(r) = r^nu (two branches) or by q = ln(r) in
// the singular gamma = -2 case.

#include <pctpdm/errors.hpp>
#include <pctpdm/mass_profile.hpp>
#include <pctpdm/pct_core.hpp>
#include <pctpdm/pct_maps.hpp>
#include <pctpdm/special_fn.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace pctpdm {

enum class RadialCase { A, B, Log };

inline std::string to_string(RadialCase c) {
  switch (c) {
  case RadialCase::A: return "a";
  case RadialCase::B: return "b";
  case RadialCase::Log: return "log";
  }
  return "?";
}

struct RadialSystem {
  RadialCase case_tag = RadialCase::A;
  int ell = 0;
  double Lambda = 0.0;
  double gamma = 0.0;
  double alpha = 1.0;
  double C = 1.0;
  /// Length scale xi of case (a); NaN where the scale depends on n.
  double xi_scale = std::numeric_limits<double>::quiet_NaN();
  /// Angular parameter of the oscillator reference used by the map.
  double reference_L = 0.0;
  TargetSystem system;
};

/// Lambda(l) = |gamma + 2|^{-1} sqrt(4 l (l + 1) + (gamma - 1)^2)
inline double radial_lambda(double gamma, int ell) {
  if (gamma == -2.0) throw Error(ErrorKind::InvalidParams, "Lambda: gamma = -2");
  if (ell < 0) throw Error(ErrorKind::InvalidParams, "Lambda: negative l");
  return std::sqrt(4.0 * ell * (ell + 1.0) + (gamma - 1.0) * (gamma - 1.0)) / std::abs(gamma + 2.0);
}

/// Residual of the radial identity
///   V - E + l(l+1)/(2 m r^2) = (q')^2/m [Vref(q) - Eref]
///                              + L(L+1)/(2m) (q'/q)^2 + m'/(2 m^2 r) + F/m
/// at the points rs.
inline ResidualReport radial_map_condition(const MassProfile &p, const PctFunctions &pct,
                                           const ReferenceProblem &ref, int ell, double L, int n,
                                           const RealFn &V, double E,
                                           const std::vector<double> &rs) {
  ResidualReport rep;
  const double Eref = ref.E(n);
  for (double r : rs) {
    if (!(r > 0)) throw Error(ErrorKind::DomainViolation, "radial_map_condition: r <= 0");
    const double m = p.m(r);
    const double dq = pct.dq(r);
    if (!(m > kMassEpsilon) || !(std::abs(dq) > kMassEpsilon)) {
      rep.skipped.push_back(r);
      continue;
    }
    const double q = pct.q(r);
    if (q == 0.0) {
      rep.skipped.push_back(r);
      continue;
    }
    const double lhs = V(r) - E + ell * (ell + 1.0) / (2.0 * m * r * r);
    const double ratio = dq / q;
    const double rhs = dq * dq / m * (ref.V(q) - Eref) + L * (L + 1.0) / (2.0 * m) * ratio * ratio +
                       p.dm(r) / (2.0 * m * m * r) + f_functional(p, pct, r) / m;
    const double res = std::abs(lhs - rhs);
    if (!std::isfinite(res)) {
      throw Error(ErrorKind::SingularPoint, "radial_map_condition: non-finite at r = " + std::to_string(r));
    }
    ++rep.evaluated;
    if (rep.evaluated == 1 || res > rep.max) {
      rep.max = res;
      rep.worst_x = r;
    }
  }
  return rep;
}

inline ResidualReport radial_residual(const RadialSystem &rs, int n, const std::vector<double> &r) {
  const TargetSystem &s = rs.system;
  return radial_map_condition(s.profile, s.pct(n), *s.reference, rs.ell, rs.reference_L, n, s.V,
                              s.E(n), r);
}

namespace detail {

inline TargetSystem radial_base(ClassTag tag, const MassProfile &p, int ell) {
  TargetSystem s;
  s.tag = tag;
  s.profile_id = p.id;
  s.profile = p;
  s.operative_domain = {0.0, kInf};
  s.radial_ell = ell;
  return s;
}

inline PctFunctions power_pct(const MassProfile &p, double scale, double nu) {
  return make_pct(
      p, [scale, nu](double r) { return scale * std::pow(r, nu); },
      [scale, nu](double r) { return scale * nu * std::pow(r, nu - 1.0); });
}

inline void check_powerlaw(double alpha, double gamma, double C, int ell) {
  if (!(alpha > 0)) throw Error(ErrorKind::InvalidParams, "alpha must be positive");
  if (gamma == -2.0) throw Error(ErrorKind::InvalidParams, "gamma = -2 needs the singular case");
  if (!(C > 0)) throw Error(ErrorKind::InvalidParams, "C must be positive");
  if (ell < 0) throw Error(ErrorKind::InvalidParams, "l must be nonnegative");
}

} // namespace detail

/// nu = 1 + gamma/2:
/// V = (alpha/2) C^2 r^{gamma+2}, E = ((gamma+2)/2) C (2n + Lambda + 1/4).
inline RadialSystem powerlaw_case_a(double alpha, double gamma, double C, int ell) {
  detail::check_powerlaw(alpha, gamma, C, ell);
  RadialSystem out;
  out.case_tag = RadialCase::A;
  out.ell = ell;
  out.gamma = gamma;
  out.alpha = alpha;
  out.C = C;
  out.Lambda = radial_lambda(gamma, ell);
  out.reference_L = out.Lambda - 0.5;
  const double nu = 1.0 + 0.5 * gamma;
  const double xi = std::pow(2.0 * alpha * C / (gamma + 2.0), 1.0 / (gamma + 2.0));
  out.xi_scale = xi;

  const MassProfile p = powerlaw_mass(alpha, gamma);
  TargetSystem s = detail::radial_base(ClassTag::Radial3DA, p, ell);
  s.params = {{"alpha", alpha}, {"gamma", gamma}, {"C", C}, {"ell", double(ell)}};
  s.V = [alpha, gamma, C](double r) { return 0.5 * alpha * C * C * std::pow(r, gamma + 2.0); };
  const double Lam = out.Lambda;
  s.E = [gamma, C, Lam](int n) { return 0.5 * (gamma + 2.0) * C * (2.0 * n + Lam + 0.25); };
  s.phi = [gamma, xi, Lam](int n, double r) {
    const double t = xi * r;
    const double w = std::pow(t, gamma + 2.0);
    return detail::damped(-0.5 * w, std::pow(t, (1.0 + 0.5 * gamma) * Lam + 0.5 * (gamma + 1.0)) *
                                        laguerre(n, Lam, w));
  };
  s.candidates = {{"target_formula", s.E}};
  // lambda^2 = alpha C / nu turns (q')^2/m Vref(q) into V.
  s.reference = oscillator3d_reference(std::sqrt(alpha * C / nu), out.reference_L);
  s.pct = [p, nu](int) { return detail::power_pct(p, 1.0, nu); };
  out.system = std::move(s);
  return out;
}

/// nu = 1/2 + gamma/4, published form:
/// V = -(1/2)(C/sqrt(alpha)) r^{-1+gamma/2},
/// E = -(C^2/2)/((gamma+2)^2 (n + Lambda + 1/8)^2).
inline RadialSystem powerlaw_case_b(double alpha, double gamma, double C, int ell) {
  detail::check_powerlaw(alpha, gamma, C, ell);
  RadialSystem out;
  out.case_tag = RadialCase::B;
  out.ell = ell;
  out.gamma = gamma;
  out.alpha = alpha;
  out.C = C;
  out.Lambda = radial_lambda(gamma, ell);
  out.reference_L = 2.0 * out.Lambda - 0.5;
  const double nu = 0.5 + 0.25 * gamma;
  const double g2 = (gamma + 2.0) * (gamma + 2.0);
  const double sa = std::sqrt(alpha);
  const double Lam = out.Lambda;

  const MassProfile p = powerlaw_mass(alpha, gamma);
  TargetSystem s = detail::radial_base(ClassTag::Radial3DB, p, ell);
  s.params = {{"alpha", alpha}, {"gamma", gamma}, {"C", C}, {"ell", double(ell)}};
  s.V = [sa, gamma, C](double r) { return -0.5 * C / sa * std::pow(r, -1.0 + 0.5 * gamma); };
  s.E = [C, g2, Lam](int n) {
    const double k = n + Lam + 0.125;
    return -0.5 * C * C / (g2 * k * k);
  };
  const double expo = 1.0 / (1.0 + 0.5 * gamma);
  s.phi = [gamma, sa, C, g2, Lam, expo](int n, double r) {
    const double xin = std::pow(4.0 * sa * C / (g2 * (n + Lam + 0.125)), expo);
    const double t = xin * r;
    const double w = std::pow(t, 1.0 + 0.5 * gamma);
    return detail::damped(-0.5 * w, std::pow(t, (1.0 + 0.5 * gamma) * Lam + 0.5 * (1.0 + gamma)) *
                                        laguerre(n, 2.0 * Lam, w));
  };
  s.candidates = {{"target_formula", s.E}};
  const double L = out.reference_L;
  s.reference = oscillator3d_reference(1.0, L);
  // q = s_n r^nu with s_n^2 = K / Eref(n), K = C sqrt(alpha) / (2 nu^2).
  const double K = C * sa / (2.0 * nu * nu);
  s.pct = [p, nu, K, L](int n) {
    const double Eref = 2.0 * n + L + 0.75;
    return detail::power_pct(p, std::sqrt(K / Eref), nu);
  };
  out.system = std::move(s);
  return out;
}

/// m = alpha r^{-2}, q = ln(r), l = 0 only:
/// V = ln(r)^2/(2 alpha) + (C^2/2) ln(r)^{-2}, E = (2n + Lambda + 11/8)/alpha,
/// Lambda = sqrt(1 + 4 alpha C^2)/2. The potential is singular at r = 1,
/// which splits the half-line into two independent regions; ln(r) enters the
/// wavefunction through |ln r|.
inline RadialSystem powerlaw_singular(double alpha, double C, int ell = 0) {
  if (!(alpha > 0)) throw Error(ErrorKind::InvalidParams, "alpha must be positive");
  if (ell != 0) throw Error(ErrorKind::InvalidParams, "singular case is S-wave only (l = 0)");
  RadialSystem out;
  out.case_tag = RadialCase::Log;
  out.ell = 0;
  out.gamma = -2.0;
  out.alpha = alpha;
  out.C = C;
  out.Lambda = 0.5 * std::sqrt(1.0 + 4.0 * alpha * C * C);
  out.reference_L = out.Lambda - 0.5;
  const double Lam = out.Lambda;

  const MassProfile p = powerlaw_mass(alpha, -2.0);
  TargetSystem s = detail::radial_base(ClassTag::Radial3DLog, p, 0);
  s.params = {{"alpha", alpha}, {"gamma", -2.0}, {"C", C}, {"ell", 0.0}};
  s.singular_points = {1.0};
  s.V = [alpha, C](double r) {
    const double l = std::log(r);
    return l * l / (2.0 * alpha) + 0.5 * C * C / (l * l);
  };
  s.E = [alpha, Lam](int n) { return (2.0 * n + Lam + 11.0 / 8.0) / alpha; };
  s.phi = [Lam](int n, double r) {
    const double l = std::abs(std::log(r));
    return detail::damped(-0.5 * l * l,
                          std::pow(r, -0.5) * std::pow(l, Lam + 0.5) * laguerre(n, Lam, l * l));
  };
  s.candidates = {{"target_formula", s.E}};
  s.reference = oscillator3d_reference(1.0, out.reference_L);
  s.pct = [p](int) {
    return make_pct(p, [](double r) { return std::log(r); }, [](double r) { return 1.0 / r; });
  };
  out.system = std::move(s);
  return out;
}

} // namespace pctpdm
