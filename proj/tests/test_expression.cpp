#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "defectscope/errors.hpp"
#include "defectscope/expression.hpp"

using namespace defectscope;

static const std::vector<std::string> kW = {"w1", "w2"};

TEST_CASE("basic evaluation") {
  CHECK(Expression::parse("sin(w1)*cos(w2)", kW).eval(M_PI / 2, 0.0) == doctest::Approx(1.0));
  CHECK(Expression::parse("w1^2 - w2^2", kW).eval(2.0, 1.0) == doctest::Approx(3.0));
  CHECK(Expression::parse("atan2(w2, w1)", kW).eval(0.0, 1.0) == doctest::Approx(M_PI / 2));
  CHECK(Expression::parse("pi", kW).eval(0.0, 0.0) == doctest::Approx(M_PI));
  CHECK(Expression::parse("sqrt(abs(-9))", kW).eval(0.0, 0.0) == doctest::Approx(3.0));
  CHECK(Expression::parse("exp(log(5))", kW).eval(0.0, 0.0) == doctest::Approx(5.0));
}

TEST_CASE("precedence and associativity") {
  // ^ binds tighter than unary minus, which binds tighter than *
  CHECK(Expression::parse("-2^2", kW).eval(0.0, 0.0) == doctest::Approx(-4.0));
  CHECK(Expression::parse("(-2)^2", kW).eval(0.0, 0.0) == doctest::Approx(4.0));
  CHECK(Expression::parse("2^3^2", kW).eval(0.0, 0.0) == doctest::Approx(512.0));
  CHECK(Expression::parse("2^-1", kW).eval(0.0, 0.0) == doctest::Approx(0.5));
  CHECK(Expression::parse("1+2*3", kW).eval(0.0, 0.0) == doctest::Approx(7.0));
  CHECK(Expression::parse("-w1^2", kW).eval(3.0, 0.0) == doctest::Approx(-9.0));
  CHECK(Expression::parse("6/2/3", kW).eval(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(Expression::parse("1 - 2 - 3", kW).eval(0.0, 0.0) == doctest::Approx(-4.0));
}

TEST_CASE("errors carry byte offsets") {
  CHECK_THROWS_AS(Expression::parse("1 + * 2", kW), Error);
  try {
    Expression::parse("1 + * 2", kW);
  } catch (const Error& e) {
    CHECK(e.code() == errc::syntax);
    CHECK(std::string(e.what()).find("byte 4") != std::string::npos);
  }
  try {
    Expression::parse("w1 + bogus", kW);
  } catch (const Error& e) {
    CHECK(e.code() == errc::unknown_identifier);
    CHECK(std::string(e.what()).find("byte 5") != std::string::npos);
  }
  CHECK_THROWS_AS(Expression::parse("sin(w1", kW), Error);
  CHECK_THROWS_AS(Expression::parse("atan2(w1)", kW), Error);
  CHECK_THROWS_AS(Expression::parse("w1 w2", kW), Error);
}

TEST_CASE("symbolic derivatives match finite differences") {
  const char* exprs[] = {
      "w1^2*w2 + sin(w1*w2)",
      "atan2(w2, w1)",
      "sqrt(w1^2 + w2^2)",
      "exp(-w1)*log(w2 + 3)",
      "tan(w1/4) + w2^3",
      "cos(w1)^2 / (1 + w2^2)",
  };
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.2, 1.7);
  for (const char* s : exprs) {
    Expression e = Expression::parse(s, kW);
    Expression d1 = e.derivative(0);
    Expression d2 = e.derivative(1);
    for (int k = 0; k < 20; ++k) {
      double a = u(rng), b = u(rng);
      double h = 1e-6;
      double fd1 = (e.eval(a + h, b) - e.eval(a - h, b)) / (2 * h);
      double fd2 = (e.eval(a, b + h) - e.eval(a, b - h)) / (2 * h);
      CHECK(d1.eval(a, b) == doctest::Approx(fd1).epsilon(1e-5));
      CHECK(d2.eval(a, b) == doctest::Approx(fd2).epsilon(1e-5));
    }
  }
}

TEST_CASE("second derivatives via repeated differentiation") {
  Expression e = Expression::parse("sin(w1)*w2^2", kW);
  Expression e11 = e.derivative(0).derivative(0);
  Expression e12 = e.derivative(0).derivative(1);
  CHECK(e11.eval(0.3, 2.0) == doctest::Approx(-std::sin(0.3) * 4.0));
  CHECK(e12.eval(0.3, 2.0) == doctest::Approx(std::cos(0.3) * 4.0));
}
