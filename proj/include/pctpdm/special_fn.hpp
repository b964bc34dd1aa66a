#pragma once

// Orthogonal polynomials and quadrature used by every wavefunction formula.

#include <pctpdm/errors.hpp>

#include <cmath>
#include <concepts>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace pctpdm {

enum class PolynomialFamily { Hermite, GeneralizedLaguerre };

struct PolynomialEval {
  PolynomialFamily family;
  int degree;
  double parameter; // Laguerre index, 0 for Hermite
  double argument;
  double value;
};

/// Physicists' Hermite polynomial by upward recurrence, in any float type.
template <std::floating_point T>
T hermite_t(int n, T x) {
  if (n < 0) throw Error(ErrorKind::InvalidParams, "hermite: negative degree");
  if (n == 0) return T(1);
  T prev = 1;
  T cur = 2 * x;
  for (int k = 1; k < n; ++k) {
    const T next = 2 * x * cur - T(2 * k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Generalized Laguerre polynomial L_n^nu(x) by upward recurrence.
template <std::floating_point T>
T laguerre_t(int n, T nu, T x) {
  if (n < 0) throw Error(ErrorKind::InvalidParams, "laguerre: negative degree");
  if (n == 0) return T(1);
  T prev = 1;
  T cur = 1 + nu - x;
  for (int k = 1; k < n; ++k) {
    const T next = ((2 * k + 1 + nu - x) * cur - (k + nu) * prev) / T(k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

inline double hermite(int n, double x) { return hermite_t<double>(n, x); }
inline double laguerre(int n, double nu, double x) { return laguerre_t<double>(n, nu, x); }

inline PolynomialEval evaluate_hermite(int n, double x) {
  return {PolynomialFamily::Hermite, n, 0.0, x, hermite(n, x)};
}

inline PolynomialEval evaluate_laguerre(int n, double nu, double x) {
  return {PolynomialFamily::GeneralizedLaguerre, n, nu, x, laguerre(n, nu, x)};
}

/// ln of the Hermite norm  sqrt(pi) 2^n n!
inline double log_hermite_norm_sq(int n) {
  return 0.5 * std::log(std::numbers::pi) + n * std::numbers::ln2 + std::lgamma(n + 1.0);
}

/// ln of the Laguerre norm  Gamma(n + nu + 1) / n!
inline double log_laguerre_norm_sq(int n, double nu) {
  return std::lgamma(n + nu + 1.0) - std::lgamma(n + 1.0);
}

// ---------------------------------------------------------------------------
// Quadrature

enum class QuadratureKind { CompositeSimpson, GaussLegendre };

struct QuadratureRule {
  QuadratureKind kind;
  std::vector<double> nodes;
  std::vector<double> weights;
  double a;
  double b;
};

/// Composite Simpson on `points` equally spaced nodes (forced odd, >= 3),
/// endpoints included.
inline QuadratureRule composite_simpson(double a, double b, int points) {
  if (!(b > a)) throw Error(ErrorKind::InvalidParams, "composite_simpson: need a < b");
  if (points < 3) points = 3;
  if (points % 2 == 0) ++points;
  QuadratureRule rule{QuadratureKind::CompositeSimpson, {}, {}, a, b};
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const double h = (b - a) / (points - 1);
  for (int i = 0; i < points; ++i) {
    rule.nodes[i] = (i == points - 1) ? b : a + i * h;
    double w = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights[i] = w * h / 3.0;
  }
  return rule;
}

/// Gauss-Legendre nodes on [a, b] by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(double a, double b, int n) {
  if (!(b > a)) throw Error(ErrorKind::InvalidParams, "gauss_legendre: need a < b");
  if (n < 1) throw Error(ErrorKind::InvalidParams, "gauss_legendre: need n >= 1");
  QuadratureRule rule{QuadratureKind::GaussLegendre, std::vector<double>(n),
                      std::vector<double>(n), a, b};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

template <class F>
double integrate(F &&f, const QuadratureRule &rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteIntegrand,
                  "integrand not finite at x = " + std::to_string(rule.nodes[i]));
    }
    sum += rule.weights[i] * v;
  }
  return sum;
}

/// Weighted sum over already-sampled values; the caller guarantees the
/// samples sit on `rule.nodes`.
inline double integrate_samples(std::span<const double> values, const QuadratureRule &rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += rule.weights[i] * values[i];
  return sum;
}

namespace detail {

template <class F>
double adaptive_simpson_step(F &f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14 * (1.0 + std::abs(a))) {
    return left + right + delta / 15.0;
  }
  if (depth >= max_depth) {
    throw Error(ErrorKind::IntegrationFailure,
                "adaptive Simpson exceeded depth limit near x = " + std::to_string(m));
  }
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace detail

/// Adaptive Simpson with Richardson correction. Integrates over [a, b] in
/// either orientation; throws IntegrationFailure past `max_depth`.
template <class F>
double adaptive_simpson(F &&f, double a, double b, double tol = 1e-10, int max_depth = 50) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, tol, max_depth);
  // A few fixed panels first so narrow features are not skipped by the
  // initial coarse estimate.
  constexpr int panels = 16;
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p == panels - 1) ? b : lo + width;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    if (!std::isfinite(flo) || !std::isfinite(fhi) || !std::isfinite(fmid)) {
      throw Error(ErrorKind::NonFiniteIntegrand, "adaptive Simpson: integrand not finite");
    }
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::adaptive_simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / panels, 0,
                                           max_depth);
  }
  return total;
}

} // namespace pctpdm
