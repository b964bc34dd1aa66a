#pragma once

// Point canonical transformation machinery: the transformation functions q,
// the F(m, q) functional and the residual of the master identity
//
//   V - E = (q')^2/m [Vref(q) - Eref] + F(m, q)/m.

#include <pctpdm/errors.hpp>
#include <pctpdm/mass_profile.hpp>
#include <pctpdm/special_fn.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pctpdm {

struct PctFunctions {
  RealFn q;
  RealFn dq;
  RealFn d2q;
  RealFn d3q;
  RealFn g;
};

/// Fill q'', q''' by fourth-order central differences of the closed-form q'
/// (step 1e-3 max(1,|x|)) and g = sqrt(q'/m).
inline PctFunctions make_pct(const MassProfile &p, RealFn q, RealFn dq) {
  PctFunctions f;
  f.q = std::move(q);
  f.dq = std::move(dq);
  RealFn first = f.dq;
  f.d2q = [first](double x) { return detail::fd_first(first, x); };
  f.d3q = [first](double x) { return detail::fd_second(first, x); };
  RealFn m = p.m;
  f.g = [first, m](double x) { return std::sqrt(first(x) / m(x)); };
  return f;
}

/// q = c * tau * mu, the choice (q')^2 = c^2 m shared by the Osc-1, Cou-1 and
/// Morse maps.
inline PctFunctions linear_mu_pct(const MassProfile &p, double tau, double c = 1.0) {
  MassProfile prof = p;
  RealFn m = p.m;
  return make_pct(
      p, [prof, tau, c](double x) { return c * tau * mu(prof, tau, x); },
      [m, c](double x) { return c * std::sqrt(m(x)); });
}

enum class ReferenceClass { Oscillator, Coulomb, Morse, Oscillator3D };

inline std::string to_string(ReferenceClass c) {
  switch (c) {
  case ReferenceClass::Oscillator: return "oscillator";
  case ReferenceClass::Coulomb: return "coulomb";
  case ReferenceClass::Morse: return "morse";
  case ReferenceClass::Oscillator3D: return "oscillator3d";
  }
  return "?";
}

struct ReferenceProblem {
  ReferenceClass kind;
  std::function<double(double)> V;
  std::function<double(int)> E;
  std::function<double(int, double)> psi; // unnormalized
  std::optional<int> n_max;
  std::map<std::string, double> params;
};

/// V = lambda^4 y^2 / 2, E = lambda^2 (n + 1/2).
inline ReferenceProblem oscillator_reference(double lambda) {
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidParams, "oscillator: lambda must be positive");
  const double l2 = lambda * lambda;
  ReferenceProblem r;
  r.kind = ReferenceClass::Oscillator;
  r.params = {{"lambda", lambda}};
  r.V = [l2](double y) { return 0.5 * l2 * l2 * y * y; };
  r.E = [l2](int n) { return l2 * (n + 0.5); };
  r.psi = [lambda, l2](int n, double y) {
    return std::exp(-0.5 * l2 * y * y) * hermite(n, lambda * y);
  };
  return r;
}

/// 1D Coulomb on y > 0: V = -Z/y, E = -Z^2/(2 (n+1)^2).
inline ReferenceProblem coulomb_reference(double Z) {
  if (!(Z > 0)) throw Error(ErrorKind::InvalidParams, "coulomb: Z must be positive");
  ReferenceProblem r;
  r.kind = ReferenceClass::Coulomb;
  r.params = {{"Z", Z}};
  r.V = [Z](double y) { return -Z / y; };
  r.E = [Z](int n) { return -Z * Z / (2.0 * (n + 1.0) * (n + 1.0)); };
  r.psi = [Z](int n, double y) {
    const double k = Z / (n + 1.0);
    return y * std::exp(-k * y) * laguerre(n, 1.0, 2.0 * k * y);
  };
  return r;
}

/// Morse reference exactly as it is commonly printed for this construction:
/// V = -(lambda^2/2)(e^{-2 lambda y} - xi)^2 and
/// E = -(lambda^2/2)(xi - 2n - 1)^2 - lambda^2 xi^2 / 2, n <= floor(xi/2).
/// The signs are carried unchanged; pct_maps exposes the alternative.
inline ReferenceProblem morse_reference(double lambda, double xi) {
  if (!(lambda > 0) || !(xi > 0)) {
    throw Error(ErrorKind::InvalidParams, "morse: lambda and xi must be positive");
  }
  const double l2 = lambda * lambda;
  ReferenceProblem r;
  r.kind = ReferenceClass::Morse;
  r.params = {{"lambda", lambda}, {"xi", xi}};
  r.V = [l2, lambda, xi](double y) {
    const double d = std::exp(-2.0 * lambda * y) - xi;
    return -0.5 * l2 * d * d;
  };
  r.E = [l2, xi](int n) {
    const double s = xi - 2.0 * n - 1.0;
    return -0.5 * l2 * s * s - 0.5 * l2 * xi * xi;
  };
  r.psi = [lambda, xi](int n, double y) {
    const double s = xi - 2.0 * n - 1.0;
    const double f = std::exp(-2.0 * lambda * y);
    return std::exp(-s * lambda * y) * std::exp(-0.5 * f) * laguerre(n, s, f);
  };
  r.n_max = static_cast<int>(std::floor(xi / 2.0));
  return r;
}

/// 3D isotropic oscillator with angular parameter L, energy constant as
/// printed (3/4).
inline ReferenceProblem oscillator3d_reference(double lambda, double L) {
  if (!(lambda > 0)) throw Error(ErrorKind::InvalidParams, "oscillator3d: lambda must be positive");
  const double l2 = lambda * lambda;
  ReferenceProblem r;
  r.kind = ReferenceClass::Oscillator3D;
  r.params = {{"lambda", lambda}, {"L", L}};
  r.V = [l2](double y) { return 0.5 * l2 * l2 * y * y; };
  r.E = [l2, L](int n) { return l2 * (2.0 * n + L + 0.75); };
  r.psi = [lambda, l2, L](int n, double y) {
    const double t = l2 * y * y;
    return std::pow(lambda * y, L + 1.0) * std::exp(-0.5 * t) * laguerre(n, L + 0.5, t);
  };
  return r;
}

/// F(m, q) = 1/4 [m''/m - 3/2 (m'/m)^2 - q'''/q' + 3/2 (q''/q')^2]
inline double f_functional(const MassProfile &p, const PctFunctions &pct, double x) {
  const double m = p.m(x);
  const double dq = pct.dq(x);
  if (!(m > 0)) throw Error(ErrorKind::SingularPoint, "F(m,q): m(x) = 0 at x = " + std::to_string(x));
  if (dq == 0.0) throw Error(ErrorKind::SingularPoint, "F(m,q): q'(x) = 0 at x = " + std::to_string(x));
  const double rm = p.dm(x) / m;
  const double rq = pct.d2q(x) / dq;
  return 0.25 * (p.d2m(x) / m - 1.5 * rm * rm - pct.d3q(x) / dq + 1.5 * rq * rq);
}

struct ResidualReport {
  double max = 0.0;
  int evaluated = 0;
  std::vector<double> skipped; // points with m or |q'| below 1e-12
  double worst_x = 0.0;
};

inline constexpr double kMassEpsilon = 1e-12;

/// Max over xs of |V - E - (q')^2/m [Vref(q) - Eref(n)] - F/m|.
inline ResidualReport pct_residual(const MassProfile &p, const PctFunctions &pct,
                                   const ReferenceProblem &ref, int n, const RealFn &V, double E,
                                   const std::vector<double> &xs) {
  ResidualReport rep;
  const double Eref = ref.E(n);
  for (double x : xs) {
    const double m = p.m(x);
    const double dq = pct.dq(x);
    if (!(m > kMassEpsilon) || !(std::abs(dq) > kMassEpsilon)) {
      rep.skipped.push_back(x);
      continue;
    }
    const double rhs = dq * dq / m * (ref.V(pct.q(x)) - Eref) + f_functional(p, pct, x) / m;
    const double r = std::abs(V(x) - E - rhs);
    if (!std::isfinite(r)) {
      throw Error(ErrorKind::SingularPoint, "pct_residual: non-finite at x = " + std::to_string(x));
    }
    ++rep.evaluated;
    if (rep.evaluated == 1 || r > rep.max) {
      rep.max = r;
      rep.worst_x = x;
    }
  }
  return rep;
}

/// Largest deviation of g sqrt(m/q') from 1 over xs.
inline double g_condition_error(const MassProfile &p, const PctFunctions &pct,
                                const std::vector<double> &xs) {
  double worst = 0.0;
  for (double x : xs) {
    const double m = p.m(x);
    const double dq = pct.dq(x);
    if (!(m > kMassEpsilon) || !(dq > kMassEpsilon)) continue;
    worst = std::max(worst, std::abs(pct.g(x) * std::sqrt(m / dq) - 1.0));
  }
  return worst;
}

} // namespace pctpdm
