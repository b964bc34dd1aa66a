#include <catch_amalgamated.hpp>

#include <pctpdm/expression.hpp>

#include <numbers>

using namespace pctpdm;
using Catch::Matchers::WithinRel;

namespace {

double eval(const std::string &s, double x = 0.0, const Expression::Params &p = {}) {
  return Expression::parse(s, p)(x);
}

ParseError parse_failure(const std::string &s, const Expression::Params &p = {}) {
  try {
    Expression::parse(s, p);
  } catch (const ParseError &e) {
    return e;
  }
  FAIL("no ParseError for '" << s << "'");
  throw;
}

} // namespace

TEST_CASE("arithmetic and precedence", "[expression]") {
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("(1 + 2) * 3") == 9.0);
  CHECK(eval("8 / 4 / 2") == 1.0);
  CHECK(eval("10 - 4 - 3") == 3.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-x^2", 3.0) == -9.0);
  CHECK(eval("2^-1") == 0.5);
  CHECK(eval("+-+3") == -3.0);
  CHECK(eval("1.5e2 + .5") == 150.5);
  CHECK(eval("  x*x   ", -1.5) == 2.25);
}

TEST_CASE("names, constants and functions", "[expression]") {
  CHECK_THAT(eval("pi"), WithinRel(std::numbers::pi, 1e-16));
  CHECK_THAT(eval("ln(e)"), WithinRel(1.0, 1e-16));
  CHECK_THAT(eval("sqrt(g + x^2)", 2.0, {{"g", 5.0}}), WithinRel(3.0, 1e-15));
  CHECK_THAT(eval("tanh(x)^2 + 1/cosh(x)^2", 0.7), WithinRel(1.0, 1e-15));
  CHECK_THAT(eval("sin(x)^2 + cos(x)^2", 1.3), WithinRel(1.0, 1e-15));
  CHECK_THAT(eval("exp(ln(x))", 4.2), WithinRel(4.2, 1e-15));
  CHECK_THAT(eval("atan(tan(x)) + sinh(0)", 0.4), WithinRel(0.4, 1e-15));
  CHECK_THAT(eval("(g + x^2)/(1 + x^2)", 1.0, {{"g", 2.0}}), WithinRel(1.5, 1e-15));
  const auto e = Expression::parse("x + 1");
  CHECK(e.text() == "x + 1");
}

TEST_CASE("parse errors carry position and expected tokens", "[expression]") {
  SECTION("unknown identifier") {
    const auto e = parse_failure("1 + y", {{"g", 1.0}});
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.position() == 4);
    CHECK(e.expected().count("x") == 1);
    CHECK(e.expected().count("g") == 1);
  }
  SECTION("missing operand") {
    const auto e = parse_failure("2 *");
    CHECK(e.position() == 3);
    CHECK(e.expected().count("number") == 1);
  }
  SECTION("unbalanced parenthesis") {
    const auto e = parse_failure("(x + 1");
    CHECK(e.position() == 6);
    CHECK(e.expected().count("')'") == 1);
  }
  SECTION("trailing garbage") {
    const auto e = parse_failure("x 2");
    CHECK(e.position() == 2);
    CHECK(e.expected().count("end of input") == 1);
  }
  SECTION("function without call") {
    const auto e = parse_failure("sqrt x");
    CHECK(e.expected().count("'('") == 1);
  }
  SECTION("empty input and stray symbols") {
    CHECK(parse_failure("").position() == 0);
    CHECK(parse_failure("x + $").position() == 4);
  }
  SECTION("message names the position") {
    const auto e = parse_failure("x +* 1");
    CHECK(std::string(e.what()).find("position 3") != std::string::npos);
  }
}
