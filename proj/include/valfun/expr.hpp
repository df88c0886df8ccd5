#pragma once

// Scalar expression trees over named variables, with a recursive-descent
// parser, a round-trippable printer and symbolic differentiation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valfun::expr {

enum class Op : std::uint8_t { Const, Var, Neg, Exp, Log, Sqrt, Add, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  double value = 0.0;     // Const
  int exponent = 0;       // Pow
  std::size_t slot = 0;   // Var: index into the variable table
  std::string name;       // Var
  std::vector<NodePtr> args;
};

/// Ordered list of declared variable names; a variable's slot is its index.
class VariableTable {
 public:
  VariableTable() = default;
  explicit VariableTable(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t slot) const { return names_.at(slot); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

/// Immutable handle to an expression tree. Copies share nodes.
class Expression {
 public:
  Expression();  // the constant 0
  explicit Expression(NodePtr root);

  const Node& node() const noexcept { return *root_; }
  const NodePtr& ptr() const noexcept { return root_; }
  Op op() const noexcept { return root_->op; }

  bool is_constant() const noexcept { return root_->op == Op::Const; }
  bool is_constant(double v) const noexcept {
    return root_->op == Op::Const && root_->value == v;
  }

 private:
  NodePtr root_;
};

// Raw builders: they never simplify, so parse(print(e)) reproduces e exactly.
Expression constant(double v);
Expression variable(std::string name, std::size_t slot);
Expression unary(Op op, Expression a);
Expression nary(Op op, std::vector<Expression> args);
Expression divide(Expression a, Expression b);
Expression power(Expression base, int exponent);

/// Parses `source` against `table`. Throws SyntaxError / UnknownVariable.
Expression parse(std::string_view source, const VariableTable& table);

/// Fully parenthesized text that `parse` maps back to a structurally equal tree.
std::string print(const Expression& e);

bool structurally_equal(const Expression& a, const Expression& b);

/// d e / d var with conservative simplification (0*a, a+0, 1*a, constant folding).
Expression differentiate(const Expression& e, std::string_view var);

double evaluate(const Expression& e, const std::map<std::string, double>& bindings);
double evaluate(const Expression& e, std::span<const double> slot_values);

/// Replaces the named variables by constants.
Expression substitute(const Expression& e, const std::map<std::string, double>& values);

std::set<std::string> variables(const Expression& e);

/// True if the tree is a sum (through +, unary minus) of terms that each
/// depend on variables from at most one of the two groups.
bool additively_separable(const Expression& e, const std::set<std::string>& group_a,
                          const std::set<std::string>& group_b);

std::size_t node_count(const Expression& e);

}  // namespace valfun::expr
