#include "valfun/expr.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "valfun/error.hpp"

namespace valfun::expr {

VariableTable::VariableTable(std::vector<std::string> names) : names_(std::move(names)) {}

std::optional<std::size_t> VariableTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

namespace {

NodePtr make_node(Op op, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

std::vector<NodePtr> unwrap(std::vector<Expression> xs) {
  std::vector<NodePtr> out;
  out.reserve(xs.size());
  for (auto& e : xs) out.push_back(e.ptr());
  return out;
}

}  // namespace

Expression::Expression() : root_(make_node(Op::Const)) {}
Expression::Expression(NodePtr root) : root_(std::move(root)) {}

Expression constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return Expression(n);
}

Expression variable(std::string name, std::size_t slot) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  n->slot = slot;
  return Expression(n);
}

Expression unary(Op op, Expression a) {
  if (op != Op::Neg && op != Op::Exp && op != Op::Log && op != Op::Sqrt)
    throw Error("unary: not a unary operator");
  return Expression(make_node(op, {a.ptr()}));
}

Expression nary(Op op, std::vector<Expression> args) {
  if (op != Op::Add && op != Op::Mul) throw Error("nary: not a sum or product");
  if (args.size() < 2) throw Error("nary: needs at least two operands");
  return Expression(make_node(op, unwrap(std::move(args))));
}

Expression divide(Expression a, Expression b) {
  return Expression(make_node(Op::Div, {a.ptr(), b.ptr()}));
}

Expression power(Expression base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->exponent = exponent;
  n->args = {base.ptr()};
  return Expression(n);
}

// ---------------------------------------------------------------- printing

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool atomic(const Node& n) {
  switch (n.op) {
    case Op::Var:
    case Op::Neg:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
      return true;
    case Op::Const:
      return !std::signbit(n.value);
    default:
      return false;
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Const:
      if (std::signbit(n.value)) {
        out += "(-";
        out += format_number(-n.value);
        out += ')';
      } else {
        out += format_number(n.value);
      }
      return;
    case Op::Var:
      out += n.name;
      return;
    case Op::Neg:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
      out += n.op == Op::Neg ? "neg(" : n.op == Op::Exp ? "exp(" : n.op == Op::Log ? "log(" : "sqrt(";
      print_node(*n.args[0], out);
      out += ')';
      return;
    case Op::Add:
    case Op::Mul: {
      const char* sep = n.op == Op::Add ? " + " : " * ";
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += sep;
        print_node(*n.args[i], out);
      }
      out += ')';
      return;
    }
    case Op::Div:
      out += '(';
      print_node(*n.args[0], out);
      out += " / ";
      print_node(*n.args[1], out);
      out += ')';
      return;
    case Op::Pow:
      if (atomic(*n.args[0])) {
        print_node(*n.args[0], out);
      } else {
        out += '(';
        print_node(*n.args[0], out);
        out += ')';
      }
      out += '^';
      out += std::to_string(n.exponent);
      return;
  }
}

}  // namespace

std::string print(const Expression& e) {
  std::string out;
  print_node(e.node(), out);
  return out;
}

namespace {

bool equal_nodes(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  switch (a.op) {
    case Op::Const:
      if (a.value != b.value || std::signbit(a.value) != std::signbit(b.value)) return false;
      break;
    case Op::Var:
      if (a.name != b.name) return false;
      break;
    case Op::Pow:
      if (a.exponent != b.exponent) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal_nodes(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace

bool structurally_equal(const Expression& a, const Expression& b) {
  return equal_nodes(a.node(), b.node());
}

// ---------------------------------------------------------- differentiation

namespace {

Expression s_add(std::vector<Expression> terms) {
  std::vector<Expression> kept;
  double folded = 0.0;
  bool any_const = false;
  for (auto& t : terms) {
    if (t.is_constant()) {
      folded += t.node().value;
      any_const = true;
    } else {
      kept.push_back(std::move(t));
    }
  }
  if (any_const && folded != 0.0) kept.push_back(constant(folded));
  if (kept.empty()) return constant(0.0);
  if (kept.size() == 1) return kept.front();
  return nary(Op::Add, std::move(kept));
}

Expression s_mul(std::vector<Expression> factors) {
  std::vector<Expression> kept;
  double folded = 1.0;
  for (auto& f : factors) {
    if (f.is_constant()) {
      if (f.node().value == 0.0) return constant(0.0);
      folded *= f.node().value;
    } else {
      kept.push_back(std::move(f));
    }
  }
  if (folded != 1.0) kept.insert(kept.begin(), constant(folded));
  if (kept.empty()) return constant(1.0);
  if (kept.size() == 1) return kept.front();
  return nary(Op::Mul, std::move(kept));
}

Expression s_neg(const Expression& a) {
  if (a.is_constant()) return constant(-a.node().value + 0.0);
  if (a.op() == Op::Neg) return Expression(a.node().args[0]);
  return unary(Op::Neg, a);
}

Expression s_div(const Expression& a, const Expression& b) {
  if (a.is_constant(0.0)) return constant(0.0);
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant() && b.node().value != 0.0)
    return constant(a.node().value / b.node().value);
  return divide(a, b);
}

Expression s_pow(const Expression& a, int k) {
  if (k == 0) return constant(1.0);
  if (k == 1) return a;
  if (a.is_constant() && (a.node().value != 0.0 || k > 0))
    return constant(std::pow(a.node().value, k));
  return power(a, k);
}

Expression diff(const Expression& e, std::string_view var) {
  const Node& n = e.node();
  auto arg = [&](std::size_t i) { return Expression(n.args[i]); };
  switch (n.op) {
    case Op::Const:
      return constant(0.0);
    case Op::Var:
      return constant(n.name == var ? 1.0 : 0.0);
    case Op::Neg:
      return s_neg(diff(arg(0), var));
    case Op::Exp:
      return s_mul({e, diff(arg(0), var)});
    case Op::Log:
      return s_div(diff(arg(0), var), arg(0));
    case Op::Sqrt:
      return s_div(diff(arg(0), var), s_mul({constant(2.0), e}));
    case Op::Add: {
      std::vector<Expression> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) terms.push_back(diff(arg(i), var));
      return s_add(std::move(terms));
    }
    case Op::Mul: {
      std::vector<Expression> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        Expression d = diff(arg(i), var);
        if (d.is_constant(0.0)) continue;
        std::vector<Expression> fs;
        for (std::size_t j = 0; j < n.args.size(); ++j) fs.push_back(j == i ? d : arg(j));
        terms.push_back(s_mul(std::move(fs)));
      }
      return s_add(std::move(terms));
    }
    case Op::Div: {
      Expression a = arg(0), b = arg(1);
      Expression da = diff(a, var), db = diff(b, var);
      if (db.is_constant(0.0)) return s_div(da, b);
      Expression num = s_add({s_mul({da, b}), s_neg(s_mul({a, db}))});
      return s_div(num, s_pow(b, 2));
    }
    case Op::Pow: {
      Expression a = arg(0);
      Expression da = diff(a, var);
      if (da.is_constant(0.0)) return constant(0.0);
      return s_mul({constant(static_cast<double>(n.exponent)), s_pow(a, n.exponent - 1), da});
    }
  }
  return constant(0.0);
}

}  // namespace

Expression differentiate(const Expression& e, std::string_view var) { return diff(e, var); }

// --------------------------------------------------------------- evaluation

namespace {

double checked(double v, const Node& n, const char* what) {
  if (!std::isfinite(v)) throw DomainError(what, print(Expression(std::make_shared<Node>(n))));
  return v;
}

template <class Lookup>
double eval_node(const Node& n, const Lookup& lookup) {
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var:
      return lookup(n);
    case Op::Neg:
      return -eval_node(*n.args[0], lookup);
    case Op::Exp:
      return checked(std::exp(eval_node(*n.args[0], lookup)), n, "exp overflow");
    case Op::Log: {
      double a = eval_node(*n.args[0], lookup);
      if (!(a > 0.0)) throw DomainError("log of non-positive value", print(Expression(std::make_shared<Node>(n))));
      return std::log(a);
    }
    case Op::Sqrt: {
      double a = eval_node(*n.args[0], lookup);
      if (!(a >= 0.0)) throw DomainError("sqrt of negative value", print(Expression(std::make_shared<Node>(n))));
      return std::sqrt(a);
    }
    case Op::Add: {
      double s = 0.0;
      for (const auto& a : n.args) s += eval_node(*a, lookup);
      return checked(s, n, "non-finite sum");
    }
    case Op::Mul: {
      double s = 1.0;
      for (const auto& a : n.args) s *= eval_node(*a, lookup);
      return checked(s, n, "non-finite product");
    }
    case Op::Div: {
      double a = eval_node(*n.args[0], lookup);
      double b = eval_node(*n.args[1], lookup);
      if (b == 0.0) throw DomainError("division by zero", print(Expression(std::make_shared<Node>(n))));
      return checked(a / b, n, "non-finite quotient");
    }
    case Op::Pow: {
      double a = eval_node(*n.args[0], lookup);
      if (a == 0.0 && n.exponent < 0)
        throw DomainError("division by zero", print(Expression(std::make_shared<Node>(n))));
      return checked(std::pow(a, n.exponent), n, "non-finite power");
    }
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expression& e, const std::map<std::string, double>& bindings) {
  return eval_node(e.node(), [&](const Node& v) {
    auto it = bindings.find(v.name);
    if (it == bindings.end()) throw UnknownVariable(v.name);
    return it->second;
  });
}

double evaluate(const Expression& e, std::span<const double> slot_values) {
  return eval_node(e.node(), [&](const Node& v) {
    if (v.slot >= slot_values.size()) throw UnknownVariable(v.name);
    return slot_values[v.slot];
  });
}

// ------------------------------------------------------------ tree utilities

namespace {

NodePtr subst(const NodePtr& n, const std::map<std::string, double>& values) {
  if (n->op == Op::Var) {
    auto it = values.find(n->name);
    return it == values.end() ? n : constant(it->second).ptr();
  }
  if (n->args.empty()) return n;
  std::vector<NodePtr> args;
  bool changed = false;
  for (const auto& a : n->args) {
    args.push_back(subst(a, values));
    changed |= args.back() != a;
  }
  if (!changed) return n;
  auto copy = std::make_shared<Node>(*n);
  copy->args = std::move(args);
  return copy;
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.op == Op::Var) out.insert(n.name);
  for (const auto& a : n.args) collect(*a, out);
}

bool separable(const Node& n, const std::set<std::string>& a, const std::set<std::string>& b) {
  if (n.op == Op::Add) {
    for (const auto& t : n.args)
      if (!separable(*t, a, b)) return false;
    return true;
  }
  if (n.op == Op::Neg) return separable(*n.args[0], a, b);
  std::set<std::string> vars;
  collect(n, vars);
  bool has_a = false, has_b = false;
  for (const auto& v : vars) {
    has_a |= a.count(v) > 0;
    has_b |= b.count(v) > 0;
  }
  return !(has_a && has_b);
}

std::size_t count(const Node& n) {
  std::size_t c = 1;
  for (const auto& a : n.args) c += count(*a);
  return c;
}

}  // namespace

Expression substitute(const Expression& e, const std::map<std::string, double>& values) {
  return Expression(subst(e.ptr(), values));
}

std::set<std::string> variables(const Expression& e) {
  std::set<std::string> out;
  collect(e.node(), out);
  return out;
}

bool additively_separable(const Expression& e, const std::set<std::string>& group_a,
                          const std::set<std::string>& group_b) {
  return separable(e.node(), group_a, group_b);
}

std::size_t node_count(const Expression& e) { return count(e.node()); }

}  // namespace valfun::expr
