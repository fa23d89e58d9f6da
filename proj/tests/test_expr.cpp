#include <gtest/gtest.h>

#include "acbc/expr.hpp"

using acbc::expr::evaluate;
using acbc::expr::Expression;
using acbc::expr::Vars;

TEST(Expr, Examples) {
  EXPECT_DOUBLE_EQ(evaluate("2*z+1", {0, 0, 0.5}), 2.0);
  EXPECT_DOUBLE_EQ(evaluate("step(0.5, 3) + 1", {0, 0, 0.25}), 1.0);
  EXPECT_DOUBLE_EQ(evaluate("step(0.5, 3) + 1", {0, 0, 0.75}), 4.0);
  EXPECT_NEAR(evaluate("sin(x)^2 + cos(x)^2", {0.7, 0, 0}), 1.0, 1e-12);
}

TEST(Expr, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(evaluate("1 - 2 - 3", {}), -4.0);
  EXPECT_DOUBLE_EQ(evaluate("8 / 4 / 2", {}), 1.0);
  EXPECT_DOUBLE_EQ(evaluate("2 * 3 ^ 2", {}), 18.0);
  EXPECT_DOUBLE_EQ(evaluate("(1 + 2) * 3", {}), 9.0);
  EXPECT_DOUBLE_EQ(evaluate("-2^2", {}), -4.0);
  EXPECT_DOUBLE_EQ(evaluate("1e-3 * 2.5E2", {}), 0.25);
  EXPECT_NEAR(evaluate("pi", {}), 3.14159265358979, 1e-14);
}

TEST(Expr, FunctionsAndVariables) {
  EXPECT_DOUBLE_EQ(evaluate("abs(x - y)", {1.0, 3.0, 0}), 2.0);
  EXPECT_DOUBLE_EQ(evaluate("exp(0)", {}), 1.0);
  EXPECT_DOUBLE_EQ(evaluate("step(0.5, 2)", {0, 0, 0.5}), 2.0);  // z >= a inclusive
  EXPECT_TRUE(Expression::parse("2*pi + 1").is_constant());
  EXPECT_FALSE(Expression::parse("1 + z").is_constant());
  EXPECT_EQ(Expression::parse("x+1").source(), "x+1");
}

TEST(Expr, ParseErrorsCarryPosition) {
  try {
    Expression::parse("1 + * 2");
    FAIL();
  } catch (const acbc::expr::ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(Expression::parse("foo(1)"), acbc::expr::ParseError);
  EXPECT_THROW(Expression::parse("(1 + 2"), acbc::expr::ParseError);
  EXPECT_THROW(Expression::parse("sin(1, 2)"), acbc::expr::ParseError);
  EXPECT_THROW(Expression::parse(""), acbc::expr::ParseError);
  EXPECT_THROW(Expression::parse("1 2"), acbc::expr::ParseError);
}

TEST(Expr, DivisionByZeroIsEvaluationError) {
  auto e = Expression::parse("1 / (z - 0.5)");
  EXPECT_THROW(e.eval({0, 0, 0.5}), acbc::expr::EvalError);
  EXPECT_DOUBLE_EQ(e.eval({0, 0, 1.0}), 2.0);
  EXPECT_EQ(acbc::ModelError("x").exit_code(), acbc::ExitCode::hypothesis);
}
