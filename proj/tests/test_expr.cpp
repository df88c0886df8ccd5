#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "valfun/error.hpp"
#include "valfun/expr.hpp"
#include "valfun/program.hpp"
#include "valfun/problem.hpp"

using namespace valfun;
using namespace valfun::expr;

namespace {

VariableTable xy_table() { return VariableTable({"x1", "x2", "y1", "y2"}); }

// Random raw AST; constants kept away from zero so most bindings stay in-domain.
Expression random_ast(std::mt19937_64& rng, int depth, const VariableTable& t) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_int_distribution<std::size_t> slot(0, t.size() - 1);
  switch (pick(rng)) {
    case 0:
      return constant(std::round(val(rng) * 1000.0) / 1000.0);
    case 1: {
      auto s = slot(rng);
      return variable(t.name(s), s);
    }
    case 2:
      return unary(Op::Neg, random_ast(rng, depth - 1, t));
    case 3:
      return unary(Op::Exp, random_ast(rng, depth - 1, t));
    case 4:
      return unary(Op::Log, random_ast(rng, depth - 1, t));
    case 5:
      return unary(Op::Sqrt, random_ast(rng, depth - 1, t));
    case 6:
    case 7: {
      std::uniform_int_distribution<int> arity(2, 4);
      std::vector<Expression> args;
      int k = arity(rng);
      for (int i = 0; i < k; ++i) args.push_back(random_ast(rng, depth - 1, t));
      return nary(pick(rng) % 2 ? Op::Add : Op::Mul, args);
    }
    case 8:
      return divide(random_ast(rng, depth - 1, t), random_ast(rng, depth - 1, t));
    default: {
      std::uniform_int_distribution<int> k(-3, 4);
      return power(random_ast(rng, depth - 1, t), k(rng));
    }
  }
}

// Smooth random expressions (bounded exp arguments, log/sqrt of positive sums).
Expression random_smooth(std::mt19937_64& rng, int depth, const VariableTable& t) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_int_distribution<std::size_t> slot(0, t.size() - 1);
  switch (pick(rng)) {
    case 0:
      return constant(val(rng));
    case 1: {
      auto s = slot(rng);
      return variable(t.name(s), s);
    }
    case 2:
      return nary(Op::Add, {random_smooth(rng, depth - 1, t), random_smooth(rng, depth - 1, t)});
    case 3:
      return nary(Op::Mul, {random_smooth(rng, depth - 1, t), random_smooth(rng, depth - 1, t)});
    case 4: {
      auto inner = power(random_smooth(rng, depth - 1, t), 2);
      return unary(Op::Log, nary(Op::Add, {constant(1.0), inner}));
    }
    case 5: {
      auto inner = power(random_smooth(rng, depth - 1, t), 2);
      return unary(Op::Exp, unary(Op::Neg, inner));
    }
    default:
      return divide(random_smooth(rng, depth - 1, t),
                    nary(Op::Add, {constant(2.0), power(random_smooth(rng, depth - 1, t), 2)}));
  }
}

}  // namespace

TEST_SUITE("expr") {
  TEST_CASE("parse builds a product over y1 and a sum") {
    VariableTable t({"x1", "y1"});
    Expression e = parse("y1*(x1+1)", t);
    CHECK(e.op() == Op::Mul);
    REQUIRE(e.node().args.size() == 2);
    CHECK(e.node().args[0]->op == Op::Var);
    CHECK(e.node().args[0]->name == "y1");
    CHECK(e.node().args[1]->op == Op::Add);
    CHECK(e.node().args[1]->args[1]->value == 1.0);
  }

  TEST_CASE("constant zero") {
    Expression e = parse("0", xy_table());
    CHECK(e.is_constant(0.0));
    CHECK(evaluate(e, std::map<std::string, double>{}) == 0.0);
  }

  TEST_CASE("log(1+exp(...)) evaluates to log 2 at y=(3,0)") {
    VariableTable t({"y1", "y2"});
    Expression e = parse("log(1+exp(y1*0 + y2*1))", t);
    CHECK(evaluate(e, {{"y1", 3.0}, {"y2", 0.0}}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("derivative of a linear term simplifies to y1") {
    VariableTable t({"x1", "y1"});
    Expression d = differentiate(parse("y1*(x1+1)", t), "x1");
    CHECK(print(d) == "y1");
  }

  TEST_CASE("d/dy1 of y1*y1 at 3 is 6 and agrees with a central difference") {
    VariableTable t({"y1"});
    Expression e = parse("y1*y1", t);
    Expression d = differentiate(e, "y1");
    double sym = evaluate(d, {{"y1", 3.0}});
    CHECK(sym == 6.0);
    double h = 1e-5;
    double fd = (evaluate(e, {{"y1", 3.0 + h}}) - evaluate(e, {{"y1", 3.0 - h}})) / (2 * h);
    CHECK(std::abs(fd - sym) <= 1e-8);
  }

  TEST_CASE("y1*(x1+1) at x1=-2, y1=-3 is 3") {
    VariableTable t({"x1", "y1"});
    CHECK(evaluate(parse("y1*(x1+1)", t), {{"x1", -2.0}, {"y1", -3.0}}) == 3.0);
  }

  TEST_CASE("simplification rules") {
    VariableTable t({"x1", "y1"});
    CHECK(print(differentiate(parse("0*x1 + y1", t), "x1")) == "0");
    CHECK(print(differentiate(parse("3*x1", t), "x1")) == "3");
    CHECK(print(differentiate(parse("x1^2", t), "x1")) == "(2 * x1)");
    CHECK(print(differentiate(parse("y1", t), "x1")) == "0");
  }

  TEST_CASE("operator grammar") {
    VariableTable t({"x1", "y1"});
    std::map<std::string, double> b{{"x1", 2.0}, {"y1", 3.0}};
    CHECK(evaluate(parse("x1 - y1 - 1", t), b) == -2.0);
    CHECK(evaluate(parse("x1 / y1 * 3", t), b) == doctest::Approx(2.0));
    CHECK(evaluate(parse("x1^-2", t), b) == 0.25);
    CHECK(evaluate(parse("-x1^2", t), b) == -4.0);
    CHECK(evaluate(parse("-3^2", t), b) == -9.0);
    CHECK(evaluate(parse("2*-3", t), b) == -6.0);
    CHECK(evaluate(parse("neg(x1) + sqrt(4) + 1.5e1", t), b) == 15.0);
    CHECK(evaluate(parse(".5 + 2.", t), b) == 2.5);
  }

  TEST_CASE("syntax errors carry byte offsets") {
    VariableTable t({"x1"});
    auto offset_of = [&](const char* src) {
      try {
        parse(src, t);
      } catch (const SyntaxError& e) {
        return static_cast<long>(e.offset());
      }
      return -1L;
    };
    CHECK(offset_of("x1 +") == 4);
    CHECK(offset_of("(x1") == 3);
    CHECK(offset_of("x1 $ 2") == 3);
    CHECK(offset_of("x1^y") == 3);
    CHECK(offset_of("sin(x1)") == 0);
    CHECK(offset_of("x1^2^3") == 4);
  }

  TEST_CASE("unknown variable names the culprit") {
    VariableTable t({"x1"});
    try {
      parse("x1 + zz", t);
      FAIL("expected UnknownVariable");
    } catch (const UnknownVariable& e) {
      CHECK(e.name() == "zz");
    }
  }

  TEST_CASE("domain errors identify the node") {
    VariableTable t({"x1"});
    CHECK_THROWS_AS(evaluate(parse("log(x1)", t), {{"x1", 0.0}}), DomainError);
    CHECK_THROWS_AS(evaluate(parse("1/x1", t), {{"x1", 0.0}}), DomainError);
    CHECK_THROWS_AS(evaluate(parse("sqrt(x1)", t), {{"x1", -1.0}}), DomainError);
    CHECK_THROWS_AS(evaluate(parse("x1^-1", t), {{"x1", 0.0}}), DomainError);
    try {
      evaluate(parse("3 + log(x1 - 1)", t), {{"x1", 1.0}});
    } catch (const DomainError& e) {
      CHECK(e.node() == "log((x1 + neg(1)))");
    }
  }

  TEST_CASE("print then parse is the identity on random trees") {
    std::mt19937_64 rng(7);
    VariableTable t = xy_table();
    std::uniform_int_distribution<int> depth(0, 8);
    for (int i = 0; i < 1000; ++i) {
      Expression e = random_ast(rng, depth(rng), t);
      std::string text = print(e);
      Expression back = parse(text, t);
      REQUIRE_MESSAGE(structurally_equal(e, back), text);
      CHECK(print(back) == text);
    }
  }

  TEST_CASE("mixed partials commute") {
    std::mt19937_64 rng(11);
    VariableTable t = xy_table();
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      Expression e = random_smooth(rng, 5, t);
      for (const char* v1 : {"x1", "y1", "y2"})
        for (const char* v2 : {"x2", "y1", "y2"}) {
          Expression a = differentiate(differentiate(e, v1), v2);
          Expression b = differentiate(differentiate(e, v2), v1);
          std::vector<double> s{u(rng), u(rng), u(rng), u(rng)};
          double va = evaluate(a, s), vb = evaluate(b, s);
          CHECK(std::abs(va - vb) <= 1e-12 * std::max({1.0, std::abs(va), std::abs(vb)}));
          ++checked;
        }
    }
    CHECK(checked == 2700);
  }

  TEST_CASE("symbolic derivatives match central differences on random smooth trees") {
    std::mt19937_64 rng(5);
    VariableTable t = xy_table();
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
      Expression e = random_smooth(rng, 4, t);
      Eigen::VectorXd z(4);
      for (int k = 0; k < 4; ++k) z[k] = u(rng);
      auto fn = [&](const Eigen::VectorXd& w) {
        return evaluate(e, std::span<const double>(w.data(), 4));
      };
      Eigen::VectorXd fd = oracle::central_gradient(fn, z, 1e-5);
      for (int k = 0; k < 4; ++k) {
        double sym = evaluate(differentiate(e, t.name(k)), std::span<const double>(z.data(), 4));
        CHECK(std::abs(sym - fd[k]) <= 1e-6 * (1.0 + std::abs(fn(z))) * std::max(1.0, std::abs(sym)));
      }
    }
  }

  TEST_CASE("compiled programs agree with the tree evaluator") {
    std::mt19937_64 rng(3);
    VariableTable t = xy_table();
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
      std::vector<Expression> outs{random_smooth(rng, 5, t), random_smooth(rng, 3, t)};
      outs.push_back(differentiate(outs[0], "y1"));
      Program prog(outs);
      std::vector<double> s{u(rng), u(rng), u(rng), u(rng)}, got(outs.size());
      prog.run(s, got);
      for (std::size_t k = 0; k < outs.size(); ++k) CHECK(got[k] == evaluate(outs[k], s));
    }
  }

  TEST_CASE("program raises domain errors") {
    VariableTable t({"x1"});
    Program prog({parse("log(x1)", t)});
    std::vector<double> s{-1.0}, out(1);
    CHECK_THROWS_AS(prog.run(s, out), DomainError);
  }

  TEST_CASE("separability check is structural") {
    VariableTable t = xy_table();
    std::set<std::string> xs{"x1", "x2"}, ys{"y1", "y2"};
    CHECK(additively_separable(parse("x1^2 - y1*y2 + exp(x2)", t), xs, ys));
    CHECK_FALSE(additively_separable(parse("x1*y1", t), xs, ys));
    CHECK_FALSE(additively_separable(parse("exp(x1 + y1)", t), xs, ys));
  }
}
