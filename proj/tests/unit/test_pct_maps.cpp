#include <catch_amalgamated.hpp>

#include <oracles.hpp>
#include <pctpdm/pct_maps.hpp>

#include <numbers>
#include <thread>

using namespace pctpdm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorKind kind_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidParams;
}

/// <phi_n|phi_k> with both states normalized on a shared box.
double overlap(const TargetSystem &s, int n, int k) {
  const Box box = suggest_box(s, std::max(n, k));
  const auto rule = composite_simpson(box.a, box.b, kDefaultNormPoints);
  const double an = norm_constant(s, n);
  const double ak = norm_constant(s, k);
  return integrate(
      [&](double x) { return s.operative_domain.contains(x) ? an * ak * s.phi(n, x) * s.phi(k, x) : 0.0; },
      rule);
}

} // namespace

TEST_CASE("class tags round trip", "[pct_maps]") {
  for (auto t : {ClassTag::Osc1, ClassTag::Osc2, ClassTag::Cou1, ClassTag::Cou2, ClassTag::Morse,
                 ClassTag::Radial3DA, ClassTag::Radial3DB, ClassTag::Radial3DLog}) {
    CHECK(parse_class_tag(to_string(t)) == t);
  }
  CHECK_FALSE(parse_class_tag("osc3").has_value());
}

TEST_CASE("constant mass reduces to the reference problems", "[pct_maps]") {
  SECTION("oscillator-1") {
    for (double lambda : {1.0, 1.6}) {
      const double alpha = lambda * lambda;
      const auto s = oscillator1(constant_mass(), alpha, 1.0);
      const auto ref = oscillator_reference(lambda);
      for (int n = 0; n <= 5; ++n) {
        CHECK_THAT(s.E(n), WithinRel(lambda * lambda * (n + 0.5), 1e-15));
        for (double x : {-2.0, -0.3, 0.0, 1.1, 2.7}) {
          CHECK_THAT(s.V(x), WithinAbs(ref.V(x), 1e-12));
          CHECK_THAT(s.phi(n, x), WithinAbs(std::exp(-0.5 * alpha * x * x) * hermite(n, lambda * x), 1e-10));
        }
      }
      CHECK(s.E(0) == 0.5 * alpha);
    }
  }
  SECTION("coulomb-1 on the half-line") {
    const double alpha = 1.1;
    const auto s = coulomb1(constant_mass(), alpha, 1.0);
    const auto ref = coulomb_reference(alpha * alpha);
    CHECK(s.operative_domain.lo >= 0.0);
    for (int n = 0; n <= 4; ++n) {
      for (double x : {0.2, 1.0, 4.5}) {
        CHECK_THAT(s.V(x), WithinRel(ref.V(x), 1e-12));
        CHECK_THAT(s.phi(n, x), WithinAbs(ref.psi(n, x), 1e-12));
      }
      // published value is twice the reference one
      CHECK_THAT(s.candidates[0].E(n), WithinRel(2.0 * ref.E(n), 1e-15));
      CHECK_THAT(s.candidates[1].E(n), WithinRel(ref.E(n), 1e-15));
    }
  }
}

TEST_CASE("example 1 potentials in their printed form", "[pct_maps]") {
  for (double g : {1.0, 2.0, 5.0}) {
    const auto p = example1(g);
    const double tau = 1.2, alpha = 0.8;
    const auto o1 = oscillator1(p, alpha, tau);
    const auto o2 = oscillator2(p, tau);
    const auto c1 = coulomb1(p, alpha, tau);
    const auto c2 = coulomb2(p, tau);
    for (double x : {0.3, 1.0, 2.2, 5.0}) {
      const double x2 = x * x;
      const double corr = 0.5 * (g - 1.0) * (3 * x2 * x2 + 2 * (2 - g) * x2 - g) / std::pow(g + x2, 4);
      const double u = (x + (g - 1.0) * std::atan(x)) / tau;
      CHECK_THAT(o1.V(x), WithinRel(0.5 * alpha * alpha * u * u + corr, 1e-12));
      CHECK_THAT(o2.V(x), WithinRel(-0.5 / (tau * tau * u) - 3.0 / (32 * tau * tau * u * u) + corr, 1e-12));
      CHECK_THAT(c1.V(x), WithinRel(-alpha * alpha / u + corr, 1e-12));
      CHECK_THAT(c2.V(x), WithinRel(-0.5 / (tau * tau) * u * u - 3.0 / (8 * tau * tau * u * u) + corr, 1e-12));
      const double amp = std::sqrt((g + x2) / (1 + x2));
      CHECK_THAT(o1.phi(2, x), WithinRel(amp * std::exp(-0.5 * alpha * tau * u * u) * hermite(2, std::sqrt(alpha * tau) * u), 1e-12));
    }
    for (int n = 0; n <= 5; ++n) {
      CHECK(o1.E(n) == alpha / tau * (n + 0.5));
      CHECK_THAT(o2.E(n), WithinRel(-2.0 / (tau * tau * (2 * n + 1) * (2 * n + 1)), 1e-15));
      CHECK_THAT(c1.E(n), WithinRel(-std::pow(alpha * alpha * tau, 2) / ((n + 1.0) * (n + 1.0)), 1e-15));
      CHECK_THAT(c2.E(n + 1) - c2.E(n), WithinRel(-2.0 / (tau * tau), 1e-14));
    }
  }
}

TEST_CASE("example 4 morse in its printed form", "[pct_maps]") {
  const double l = 1.0, xi = 9.0;
  const auto s = morse(example4(l), l, xi, 1.0);
  CHECK(s.operative_domain.lo == 0.0);
  CHECK(std::isinf(s.operative_domain.hi));
  CHECK(s.n_range.max == 4);
  CHECK(s.n_max_candidates.at("printed_floor_xi_over_2") == 4);
  CHECK(s.n_max_candidates.at("normalizable_xi_minus_2n_minus_1_positive") == 3);
  CHECK(morse(example4(), 1.0, 8.0, 1.0).n_max_candidates.at("normalizable_xi_minus_2n_minus_1_positive") == 3);
  REQUIRE(s.candidates.size() == 2);
  CHECK(s.candidates[0].label == "target_formula");
  CHECK(s.candidates[1].label == "reference_formula");
  for (double x : {0.2, 0.9, 2.5}) {
    const double sh = std::sinh(l * x);
    const double ch = std::cosh(l * x);
    const double d = 1.0 / (ch * ch) - xi;
    const double printed = -0.5 * l * l * d * d - 0.5 * l * l * (1.0 / (sh * sh) + 1.25 / std::pow(sh, 4));
    CHECK_THAT(s.V(x), WithinRel(printed, 1e-10));
  }
  for (int n = 0; n <= 4; ++n) {
    CHECK(s.E(n) == 0.5 * std::pow(xi - 2 * n - 1, 2) - 0.5 * xi * xi);
  }
}

TEST_CASE("spectrum ordering", "[pct_maps]") {
  const auto p = example1(2.0);
  for (const auto &s : {oscillator1(p, 1.0, 1.0), oscillator2(p, 1.0), coulomb1(p, 1.0, 1.0)}) {
    for (int n = 0; n < 6; ++n) CHECK(s.E(n + 1) > s.E(n));
  }
  // the published Coulomb-2 spectrum decreases with n
  const auto c2 = coulomb2(p, 1.0);
  for (int n = 0; n < 6; ++n) CHECK(c2.E(n + 1) < c2.E(n));
}

TEST_CASE("parameter and domain errors", "[pct_maps]") {
  const auto p = example1();
  CHECK(kind_of([&] { oscillator1(p, 0.0, 1.0); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([&] { oscillator1(p, 1.0, -1.0); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([&] { morse(p, 1.0, -2.0, 1.0); }) == ErrorKind::InvalidParams);
  auto neg = constant_mass();
  neg.domain = {-kInf, 0.0};
  neg.anchor = -1.0;
  neg.anchor_value = -1.0;
  CHECK(kind_of([&] { coulomb2(neg, 1.0); }) == ErrorKind::EmptyDomain);
  CHECK(kind_of([&] { oscillator2(neg, 1.0); }) == ErrorKind::EmptyDomain);
  const auto s = oscillator1(constant_mass(), 1.0, 1.0);
  CHECK(kind_of([&] { s.param("xi"); }) == ErrorKind::InvalidParams);
}

TEST_CASE("normalization", "[pct_maps]") {
  const auto s = oscillator1(constant_mass(), 1.0, 1.0);
  CHECK_THAT(norm_constant(s, 0), WithinRel(std::pow(std::numbers::pi, -0.25), 1e-9));
  for (int n = 1; n <= 5; ++n) {
    const double want = std::exp(-0.5 * log_hermite_norm_sq(n));
    CHECK_THAT(norm_constant(s, n), WithinRel(want, 1e-9));
  }
  SECTION("normalized states integrate to one with an independent rule") {
    for (const auto &sys : {oscillator1(example1(2.0), 1.0, 1.0), coulomb1(example1(2.0), 1.0, 1.0)}) {
      for (int n = 0; n <= 3; ++n) {
        const Box box = suggest_box(sys, n);
        const auto gl = gauss_legendre(box.a, box.b, 2000);
        const double a = norm_constant(sys, n);
        const double v = integrate([&](double x) { return sys.operative_domain.contains(x) ? std::pow(a * sys.phi(n, x), 2) : 0.0; }, gl);
        CHECK_THAT(v, WithinRel(1.0, 1e-6));
      }
    }
  }
  SECTION("a box that cuts the state is rejected") {
    CHECK(kind_of([&] { normalize(s, 0, composite_simpson(-1.0, 1.0, 101)); }) == ErrorKind::NonNormalizable);
    CHECK(kind_of([&] { normalize(morse(example4(), 1.0, 9.0, 1.0), 5, composite_simpson(0.1, 5.0, 101)); }) ==
          ErrorKind::InvalidParams);
  }
  SECTION("cache is shared and thread safe") {
    const auto sys = oscillator1(example3(1.0), 1.0, 1.0);
    std::vector<double> got(4);
    std::vector<std::thread> pool;
    for (int i = 0; i < 4; ++i) pool.emplace_back([&, i] { got[i] = norm_constant(sys, 2); });
    for (auto &t : pool) t.join();
    for (double v : got) CHECK(v == got[0]);
    const auto copy = sys;
    CHECK(copy.norm_cache == sys.norm_cache);
  }
}

TEST_CASE("analytic states are orthonormal", "[pct_maps][property]") {
  std::vector<TargetSystem> systems{oscillator1(example1(2.0), 1.0, 1.0), oscillator1(example3(1.0), 1.0, 1.0),
                                    coulomb1(example1(2.0), 1.0, 1.0)};
  for (const auto &s : systems) {
    for (int n = 0; n <= 3; ++n) {
      for (int k = 0; k <= n; ++k) {
        INFO(s.profile_id << " " << to_string(s.tag) << " n=" << n << " k=" << k);
        CHECK_THAT(overlap(s, n, k), WithinAbs(n == k ? 1.0 : 0.0, 1e-5));
      }
    }
  }
}

TEST_CASE("maps onto part of the reference domain lose orthogonality", "[pct_maps]") {
  // Example 2 has mu in (0, inf): the oscillator states are restricted to q > 0
  // and renormalized there. Mixed-parity overlaps become half-line integrals.
  const auto osc = oscillator1(example2(1.0), 1.0, 1.0);
  CHECK_THAT(overlap(osc, 1, 0), WithinAbs(std::sqrt(2.0 / std::numbers::pi), 1e-5));
  CHECK_THAT(overlap(osc, 2, 1), WithinAbs(1.0 / std::sqrt(std::numbers::pi), 1e-5));
  CHECK_THAT(overlap(osc, 2, 0), WithinAbs(0.0, 1e-5));
  CHECK_THAT(overlap(osc, 3, 3), WithinAbs(1.0, 1e-5));
  // Morse on example 4 lives on x > 0 where q = ln cosh x >= 0.
  const auto m = morse(example4(1.0), 1.0, 9.0, 1.0);
  CHECK(m.operative_domain.lo == 0.0);
  CHECK(std::abs(overlap(m, 1, 0)) > 0.1);
  CHECK_THAT(overlap(m, 2, 2), WithinAbs(1.0, 1e-5));
}

TEST_CASE("analytic node counts", "[pct_maps]") {
  const auto s = oscillator1(example1(2.0), 1.0, 1.0);
  const auto xs = oracle::linspace(-8.0, 8.0, 4001);
  for (int n = 0; n <= 6; ++n) {
    std::vector<double> v;
    for (double x : xs) v.push_back(s.phi(n, x));
    CHECK(count_sign_changes(v) == n);
  }
  CHECK(count_sign_changes({1.0, 1e-12, -1.0, -2.0, 3.0}) == 2);
}

TEST_CASE("suggested box", "[pct_maps]") {
  const auto s = oscillator1(constant_mass(), 1.0, 1.0);
  const Box b = suggest_box(s, 0);
  CHECK(b.decays);
  CHECK(b.a < -6.0);
  CHECK(b.b > 6.0);
  CHECK(b.b < 9.0);
  const Box m = suggest_box(morse(example4(), 1.0, 9.0, 1.0), 3);
  CHECK(m.a == 0.0);
  CHECK(m.decays);
}
