#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mindist/expression.hpp"

using mindist::EvaluationError;
using mindist::Expression;
using mindist::ParseError;

namespace {
double ev(const std::string& src, std::vector<std::string> vars = {},
          std::vector<double> args = {}) {
    return Expression::parse(src, vars).eval(args);
}
} // namespace

TEST_CASE("arithmetic and precedence") {
    CHECK(ev("2+3*4") == 14.0);
    CHECK(ev("(2+3)*4") == 20.0);
    CHECK(ev("2*3^2") == 18.0);
    CHECK(ev("2^3^2") == 512.0); // right-associative
    CHECK(ev("-2^2") == -4.0);   // unary binds below ^
    CHECK(ev("2^-3") == 0.125);
    CHECK(ev("-(-2)") == 2.0);
    CHECK(ev("10/4") == 2.5);
    CHECK(ev("1 - 2 - 3") == -4.0); // left-associative
    CHECK(ev("0.5*4") == 2.0);
    CHECK(ev(".25*4") == 1.0);
    CHECK(ev("1e2+1") == 101.0);
}

TEST_CASE("functions, pi, variables") {
    CHECK(ev("2*(1+cos(u))", {"u"}, {0.0}) == 4.0);
    CHECK(ev("sin(u)^2 + cos(u)^2", {"u"}, {0.7}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev("cos(pi)") == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(ev("sqrt(16)") == 4.0);
    CHECK(ev("abs(0-3)") == 3.0);
    CHECK(ev("log(exp(1))") == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev("tan(0)") == 0.0);
    CHECK(ev("u*v - v", {"u", "v"}, {3.0, 2.0}) == 4.0);
    // variable order follows the declaration list, not appearance order
    CHECK(ev("v", {"u", "v"}, {1.0, 9.0}) == 9.0);
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_AS(Expression::parse("sin(", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("u+*v", {"u", "v"}), ParseError);
    CHECK_THROWS_AS(Expression::parse("2+", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("(1+2", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 2", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("sin 1", {}), ParseError); // function needs parens
    CHECK_THROWS_AS(Expression::parse("1 @ 2", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("", {}), ParseError);

    try {
        Expression::parse("u+w", {"u"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 2);
        CHECK(std::string(e.what()).find("unknown identifier 'w'") != std::string::npos);
    }
}

TEST_CASE("evaluation domain errors") {
    CHECK_THROWS_AS(ev("sqrt(u-2)", {"u"}, {1.0}), EvaluationError);
    CHECK_THROWS_AS(ev("1/(u-1)", {"u"}, {1.0}), EvaluationError);
    CHECK_THROWS_AS(ev("log(0-1)"), EvaluationError);
    CHECK_THROWS_AS(ev("log(0)"), EvaluationError);
    // pow of negative base with fractional exponent is NaN -> error
    CHECK_THROWS_AS(ev("(0-2)^0.5"), EvaluationError);
    // but integer exponents of negative bases are fine
    CHECK(ev("(0-2)^3") == -8.0);
}

TEST_CASE("whitespace and nesting") {
    CHECK(ev("  2 * ( 1 + cos( u ) ) ", {"u"}, {0.0}) == 4.0);
    CHECK(ev("sin(cos(sin(0)))") == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
    const double u = 0.3, v = 1.1;
    CHECK(ev("(u+v)^2 - (u^2 + 2*u*v + v^2)", {"u", "v"}, {u, v}) ==
          doctest::Approx(0.0).epsilon(1e-14));
}
