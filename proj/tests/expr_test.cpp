#include "harmap/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

using harmap::DomainFault;
using harmap::Expression;
using harmap::ParseError;

namespace {

double eval(const std::string& s, double x, double y) { return Expression::parse(s).eval(x, y); }

// Random expressions from the grammar. Constructs are wrapped so that every
// generated expression is smooth and fault-free on [-1, 1]^2.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> leaf(0, 3);
  if (depth == 0) {
    switch (leaf(rng)) {
      case 0: return "x";
      case 1: return "y";
      case 2: return "pi";
      default: {
        std::uniform_real_distribution<double> c(0.1, 3.0);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", c(rng));
        return buf;
      }
    }
  }
  std::uniform_int_distribution<int> pick(0, 10);
  auto a = random_expr(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return "(" + a + " + " + random_expr(rng, depth - 1) + ")";
    case 1: return a + " - " + random_expr(rng, depth - 1);
    case 2: return "(" + a + ")*(" + random_expr(rng, depth - 1) + ")";
    case 3: return "(" + a + ")/(1 + (" + random_expr(rng, depth - 1) + ")^2)";
    case 4: return "-(" + a + ")";
    case 5: return "(" + a + ")^" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng));
    case 6: return "exp(sin(" + a + "))";
    case 7: return "sin(" + a + ")";
    case 8: return "cos(" + a + ")";
    case 9: return "log(1 + (" + a + ")^2)";
    default: return "tan(0.5*sin(" + a + "))";
  }
}

}  // namespace

TEST(ExprParse, SpecExamples) {
  EXPECT_DOUBLE_EQ(eval("x*y", 2, 3), 6.0);
  EXPECT_DOUBLE_EQ(eval("exp(x)*cos(y)", 0, 0), 1.0);
  // 2*(1 + 0) - (-2) = 4
  EXPECT_DOUBLE_EQ(eval("2*(x^3 + 0) - -y", 1, 2), 4.0);
}

TEST(ExprParse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(eval("-x^2", 3, 0), -9.0);
  EXPECT_DOUBLE_EQ(eval("x - y - 1", 5, 1), 3.0);
  EXPECT_DOUBLE_EQ(eval("x / y / 2", 8, 2), 2.0);
  EXPECT_DOUBLE_EQ(eval("1 + 2*3^2", 0, 0), 19.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2)*3", 0, 0), 9.0);
  EXPECT_DOUBLE_EQ(eval("x^-2", 2, 0), 0.25);
  EXPECT_DOUBLE_EQ(eval("x^2^3", 2, 0), 64.0);
  EXPECT_NEAR(eval("pi", 0, 0), M_PI, 0.0);
  EXPECT_NEAR(eval("exp(1)", 0, 0), M_E, 1e-15);
  EXPECT_DOUBLE_EQ(eval("1.5e1 + .5", 0, 0), 15.5);
}

TEST(ExprParse, ErrorsCarryKindAndOffset) {
  auto expect_error = [](const std::string& s, ParseError::Kind kind, std::size_t offset) {
    try {
      Expression::parse(s);
      FAIL() << "accepted: " << s;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), kind) << s;
      EXPECT_EQ(e.offset(), offset) << s;
    }
  };
  expect_error("x +", ParseError::Kind::syntax, 3);
  expect_error("x * (y", ParseError::Kind::syntax, 6);
  expect_error("2 * e", ParseError::Kind::unknown_identifier, 4);
  expect_error("sqrt(x)", ParseError::Kind::unknown_identifier, 0);
  expect_error("x^2.5", ParseError::Kind::non_integer_exponent, 2);
  expect_error("x^y", ParseError::Kind::non_integer_exponent, 2);
  expect_error("x y", ParseError::Kind::syntax, 2);
  expect_error("", ParseError::Kind::syntax, 0);
  expect_error("sin x", ParseError::Kind::syntax, 4);
}

TEST(ExprParse, AcceptsAndRejectsGrammarBoundary) {
  for (const char* ok : {"x", "  y ", "-(-x)", "sin(cos(tan(x)))", "3.", "0.5e-3*x", "x^+2", "log(x)"}) {
    EXPECT_NO_THROW(Expression::parse(ok)) << ok;
  }
  for (const char* bad : {"x**2", "()", "1e", "x^", "exp()", "x)", "pi(2)", "X", "e", "2..3", "x^(2)"}) {
    EXPECT_THROW(Expression::parse(bad), ParseError) << bad;
  }
}

TEST(ExprParse, DeepNestingIsAnErrorNotACrash) {
  std::string s(5000, '(');
  s += "x";
  s += std::string(5000, ')');
  EXPECT_THROW(Expression::parse(s), ParseError);
}

TEST(ExprEval, DualExamples) {
  auto d = Expression::parse("x*y").eval_dual(2, 3);
  EXPECT_DOUBLE_EQ(d.value, 6);
  EXPECT_DOUBLE_EQ(d.dx, 3);
  EXPECT_DOUBLE_EQ(d.dy, 2);

  d = Expression::parse("exp(x)*cos(y)").eval_dual(0, 0);
  EXPECT_DOUBLE_EQ(d.value, 1);
  EXPECT_DOUBLE_EQ(d.dx, 1);
  EXPECT_DOUBLE_EQ(d.dy, 0);
}

TEST(ExprEval, TanProductAgreesWithCentralDifferences) {
  auto e = Expression::parse("tan(y)*x");
  const double h = 1e-6, x = 1.0, y = 0.3;
  auto d = e.eval_dual(x, y);
  double fdx = (e.eval(x + h, y) - e.eval(x - h, y)) / (2 * h);
  double fdy = (e.eval(x, y + h) - e.eval(x, y - h)) / (2 * h);
  EXPECT_NEAR(d.dx, fdx, 1e-6 * std::abs(fdx));
  EXPECT_NEAR(d.dy, fdy, 1e-6 * std::abs(fdy));
}

TEST(ExprEval, DomainFaults) {
  EXPECT_THROW(eval("1/x", 0, 0), DomainFault);
  EXPECT_THROW(eval("log(x)", 0, 0), DomainFault);
  EXPECT_THROW(eval("log(x)", -1, 0), DomainFault);
  EXPECT_THROW(eval("x^-1", 0, 0), DomainFault);
  EXPECT_THROW(eval("exp(x)", 1000, 0), DomainFault);
  EXPECT_THROW(Expression::parse("1/(x - 1)").eval_dual(1, 0), DomainFault);
  EXPECT_NO_THROW(eval("tan(x)", 1.5, 0));
}

TEST(ExprEval, ExtendedPrecisionMatchesDouble) {
  harmap::PrecisionGuard guard(60);
  auto e = Expression::parse("exp(x)*cos(y) + tan(x*y)/(1 + x^2) - log(2 + sin(y))");
  harmap::xreal x("0.375"), y("-1.25");
  double dv = e.eval(0.375, -1.25);
  EXPECT_NEAR(harmap::to_double(e.evaluate(x, y)), dv, 1e-14);
  auto d = e.evaluate(harmap::Dual<harmap::xreal>{x, 1, 0}, harmap::Dual<harmap::xreal>{y, 0, 1});
  auto dd = e.eval_dual(0.375, -1.25);
  EXPECT_NEAR(harmap::to_double(d.dx), dd.dx, 1e-13);
  EXPECT_NEAR(harmap::to_double(d.dy), dd.dy, 1e-13);
}

TEST(ExprProperty, AutomaticDerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    auto text = random_expr(rng, 3);
    auto e = Expression::parse(text);
    for (int p = 0; p < 10; ++p) {
      double x = coord(rng), y = coord(rng);
      auto d = e.eval_dual(x, y);
      double fdx = (e.eval(x + h, y) - e.eval(x - h, y)) / (2 * h);
      double fdy = (e.eval(x, y + h) - e.eval(x, y - h)) / (2 * h);
      ASSERT_LE(std::abs(d.dx - fdx), 1e-5 * (1 + std::abs(d.dx))) << text << " at " << x << "," << y;
      ASSERT_LE(std::abs(d.dy - fdy), 1e-5 * (1 + std::abs(d.dy))) << text << " at " << x << "," << y;
    }
  }
}

TEST(ExprProperty, UnparseRoundTripsStructurally) {
  std::mt19937_64 rng(777);
  for (int k = 0; k < 200; ++k) {
    auto e = Expression::parse(random_expr(rng, 4));
    auto again = Expression::parse(e.unparse());
    ASSERT_TRUE(e.structurally_equal(again)) << e.unparse();
    ASSERT_EQ(again.unparse(), e.unparse());
  }
}

TEST(ExprProperty, FuzzNeverCrashes) {
  std::mt19937_64 rng(99);
  const std::string alphabet = "xy0123456789.e+-*/^() pisncotaglx\t\x01\xff";
  std::uniform_int_distribution<std::size_t> len(0, 24);
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  int accepted = 0;
  for (int k = 0; k < 20000; ++k) {
    std::string s;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      s += (k % 4 == 0) ? static_cast<char>(byte(rng)) : alphabet[ch(rng)];
    }
    try {
      auto e = Expression::parse(s);
      ++accepted;
      try {
        double v = e.eval(0.5, -0.25);
        EXPECT_TRUE(std::isfinite(v));
      } catch (const DomainFault&) {
      }
    } catch (const ParseError& err) {
      EXPECT_LE(err.offset(), s.size());
    }
  }
  EXPECT_GT(accepted, 0);
}
