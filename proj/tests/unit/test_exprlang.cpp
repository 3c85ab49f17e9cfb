#include "isoyamabe/errors.hpp"
#include "isoyamabe/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace isoyamabe;
using namespace isoyamabe::expr;

namespace {

double central_difference(const Expr& e, double t, double h = 1e-6) { return (e(t + h) - e(t - h)) / (2 * h); }

}  // namespace

TEST_CASE("parse builds the expected trees") {
    const Expr e = parse("1 - t^2");
    REQUIRE(e.node().op == Op::Sub);
    CHECK(e.node().args[0]->op == Op::Num);
    CHECK(e.node().args[1]->op == Op::Pow);
    CHECK(e(0.5) == doctest::Approx(0.75));

    const Expr neg = parse("-t^2");
    CHECK(neg.node().op == Op::Neg);
    CHECK(neg(3.0) == doctest::Approx(-9.0));
}

TEST_CASE("operator precedence and associativity") {
    CHECK(parse("2^3^2")(0) == doctest::Approx(512.0));
    CHECK(parse("2*3+4*5")(0) == doctest::Approx(26.0));
    CHECK(parse("8/4/2")(0) == doctest::Approx(1.0));
    CHECK(parse("1 - 2 - 3")(0) == doctest::Approx(-4.0));
    CHECK(parse("-2^2")(0) == doctest::Approx(-4.0));
    CHECK(parse("(-2)^2")(0) == doctest::Approx(4.0));
    CHECK(parse("  t *  ( 1+t ) ")(2.0) == doctest::Approx(6.0));
    CHECK(parse("2e-1 * 10")(0) == doctest::Approx(2.0));
}

TEST_CASE("functions and constants") {
    CHECK(parse("pi")(0) == doctest::Approx(std::numbers::pi));
    CHECK(parse("sin(pi*t)")(0.5) == doctest::Approx(1.0));
    CHECK(parse("cos(t)")(0.0) == doctest::Approx(1.0));
    CHECK(parse("tan(t)")(0.3) == doctest::Approx(std::tan(0.3)));
    CHECK(parse("exp(log(t))")(2.5) == doctest::Approx(2.5));
    CHECK(parse("sqrt(t)")(9.0) == doctest::Approx(3.0));
    CHECK(parse("abs(t)")(-1.5) == doctest::Approx(1.5));
    CHECK(parse("pow(t, 3)")(2.0) == doctest::Approx(8.0));
}

TEST_CASE("syntax errors carry offset and expectation") {
    try {
        parse("sin(pi*t");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 8);
        CHECK(e.expected().find(')') != std::string::npos);
    }
    CHECK_THROWS_AS(parse(""), SyntaxError);
    CHECK_THROWS_AS(parse("1 +"), SyntaxError);
    CHECK_THROWS_AS(parse("foo(t)"), SyntaxError);
    CHECK_THROWS_AS(parse("t t"), SyntaxError);
    CHECK_THROWS_AS(parse("pow(t)"), SyntaxError);
}

TEST_CASE("evaluation signals domain errors") {
    CHECK_THROWS_AS(parse("log(t)")(0.0), DomainError);
    CHECK_THROWS_AS(parse("log(t)")(-1.0), DomainError);
    CHECK_THROWS_AS(parse("1/t")(0.0), DomainError);
    CHECK_THROWS_AS(parse("sqrt(t)")(-1.0), DomainError);
}

TEST_CASE("derivative of (1-t^2)^1.5 matches a central difference") {
    const Expr e = parse("(1-t^2)^1.5");
    const Expr de = differentiate(e);
    CHECK(std::fabs(de(0.5) - central_difference(e, 0.5)) < 1e-7);
}

TEST_CASE("derivatives agree with finite differences on random points") {
    const char* sources[] = {"sin(pi*t)*exp(t)", "t^3 - 2*t + 1", "log(2 + t^2)/(1 + t)", "sqrt(4 - t^2)",
                             "pow(1 + t^2, 0.3) * cos(3*t)", "tan(t/2) - 3*t", "(2 + sin(t))^(t + 1)"};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-0.9, 0.9);
    for (const char* src : sources) {
        CAPTURE(src);
        const Expr e = parse(src);
        const Expr de = differentiate(e);
        for (int k = 0; k < 20; ++k) {
            const double t = dist(rng);
            const double fd = central_difference(e, t, 1e-5);
            CHECK(std::fabs(de(t) - fd) < 1e-6 * (1 + std::fabs(fd)));
        }
    }
}

TEST_CASE("abs is not differentiated") { CHECK_THROWS_AS(differentiate(parse("abs(t)")), NonDifferentiable); }

TEST_CASE("print round-trips") {
    const char* sources[] = {"1 - t^2", "-t^2", "2^3^2", "(1-t)/(2*t+1)", "sin(pi*t)^2", "pow(t, 1.5) - -t",
                             "1e-300 * t", "0.1 + 0.2*t"};
    for (const char* src : sources) {
        CAPTURE(src);
        const Expr e = parse(src);
        const Expr back = parse(print(e));
        for (double t : {0.1, 0.37, 0.8}) CHECK(back(t) == e(t));
    }
}

TEST_CASE("builders fold literals") {
    const Expr e = literal(2.0) * literal(3.0) + 1.0;
    CHECK(e.is_literal(7.0));
    CHECK(variable().is_constant() == false);
    CHECK((literal(1.0) + pi()).is_constant());
}

TEST_CASE("sampled leaves interpolate and differentiate") {
    std::vector<double> x, y;
    for (int i = 0; i <= 200; ++i) {
        x.push_back(-1.0 + 2.0 * i / 200);
        y.push_back(std::sin(x.back()));
    }
    auto curve = std::make_shared<SampledCurve>(x, y);
    const Expr s = sampled(curve);
    CHECK(std::fabs(s(0.3) - std::sin(0.3)) < 1e-8);
    CHECK(std::fabs(differentiate(s)(0.3) - std::cos(0.3)) < 1e-5);
    CHECK_FALSE(s.is_printable());
    CHECK_THROWS(SampledCurve({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}));
}
