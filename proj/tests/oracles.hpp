#pragma once

// Reference computations for the tests. Each one is built from a different
// formula than the library code it checks: explicit series instead of
// recurrences, dense Jacobi rotations instead of Sturm bisection, and
// extended precision where rounding would otherwise dominate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// H_n(x) = n! sum_m (-1)^m (2x)^{n-2m} / (m! (n-2m)!)
inline long double hermite_series(int n, long double x) {
  long double sum = 0.0L;
  for (int m = 0; 2 * m <= n; ++m) {
    const long double term = std::pow(2.0L * x, n - 2 * m) /
                             (std::tgamma((long double)m + 1) * std::tgamma((long double)(n - 2 * m) + 1));
    sum += (m % 2 == 0 ? term : -term);
  }
  return sum * std::tgamma((long double)n + 1);
}

/// L_n^nu(x) = sum_i (-1)^i Gamma(n+nu+1) / (Gamma(n-i+1) Gamma(nu+i+1) i!) x^i
inline long double laguerre_series(int n, long double nu, long double x) {
  long double sum = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const long double lc = std::lgamma((long double)n + nu + 1) - std::lgamma((long double)(n - i) + 1) -
                           std::lgamma(nu + i + 1) - std::lgamma((long double)i + 1);
    const long double term = std::exp(lc) * std::pow(x, i);
    sum += (i % 2 == 0 ? term : -term);
  }
  return sum;
}

/// Sum of absolute terms of the Laguerre series; the scale of its cancellation error.
inline long double laguerre_series_scale(int n, long double nu, long double x) {
  long double sum = 0.0L;
  for (int i = 0; i <= n; ++i) {
    sum += std::exp(std::lgamma((long double)n + nu + 1) - std::lgamma((long double)(n - i) + 1) -
                    std::lgamma(nu + i + 1) - std::lgamma((long double)i + 1)) *
           std::pow(x, i);
  }
  return sum;
}

/// Composite Simpson in long double with one Richardson step (S_2N + (S_2N - S_N)/15).
inline long double simpson_richardson(const std::function<long double(long double)> &f, long double a,
                                      long double b, int panels) {
  auto simpson = [&](int n) {
    const long double h = (b - a) / (2 * n);
    long double s = f(a) + f(b);
    for (int i = 1; i < 2 * n; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + i * h);
    return s * h / 3.0L;
  };
  const long double s1 = simpson(panels);
  const long double s2 = simpson(2 * panels);
  return s2 + (s2 - s1) / 15.0L;
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline std::vector<std::vector<double>> dense_tridiagonal(const std::vector<double> &d,
                                                          const std::vector<double> &e) {
  const std::size_t n = d.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = d[i];
    if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = e[i];
  }
  return a;
}

/// Mass correction term from hand-derived closed forms of m' and m''
/// (the library differentiates its profiles independently).
inline double correction(double m, double dm, double d2m) {
  const double r1 = dm / m;
  return (d2m / m - 1.75 * r1 * r1) / (8.0 * m);
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
  return x;
}

/// n points strictly inside (a, b).
inline std::vector<double> interior(double a, double b, int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * (i + 1) / (n + 1);
  return x;
}

} // namespace oracle
