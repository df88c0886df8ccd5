#include "valfun/program.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "valfun/error.hpp"

namespace valfun::expr {

namespace {

struct Builder {
  std::unordered_map<const Node*, std::uint32_t> seen;
  std::vector<const Node*> order;

  std::uint32_t visit(const NodePtr& root) {
    // Iterative post-order so deep trees do not exhaust the stack.
    struct Frame {
      const Node* n;
      std::size_t next;
    };
    std::vector<Frame> stack{{root.get(), 0}};
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (seen.count(f.n)) {
        stack.pop_back();
        continue;
      }
      if (f.next < f.n->args.size()) {
        const Node* child = f.n->args[f.next++].get();
        if (!seen.count(child)) stack.push_back({child, 0});
        continue;
      }
      seen.emplace(f.n, static_cast<std::uint32_t>(order.size()));
      order.push_back(f.n);
      stack.pop_back();
    }
    return seen.at(root.get());
  }
};

void collect_ptrs(const NodePtr& n, std::unordered_map<const Node*, NodePtr>& out) {
  if (out.count(n.get())) return;
  out.emplace(n.get(), n);
  for (const auto& a : n->args) collect_ptrs(a, out);
}

}  // namespace

Program::Program(const std::vector<Expression>& outputs) {
  Builder b;
  std::unordered_map<const Node*, NodePtr> owners;
  for (const auto& e : outputs) {
    outputs_.push_back(b.visit(e.ptr()));
    collect_ptrs(e.ptr(), owners);
  }
  for (const Node* n : b.order) {
    Instr in{n->op, n->exponent, n->value, static_cast<std::uint32_t>(n->slot),
             static_cast<std::uint32_t>(operands_.size()), static_cast<std::uint32_t>(n->args.size())};
    for (const auto& a : n->args) operands_.push_back(b.seen.at(a.get()));
    if (n->op == Op::Var) max_slot_ = std::max(max_slot_, n->slot + 1);
    tape_.push_back(in);
    source_.push_back(owners.at(n));
  }
}

void Program::run(std::span<const double> slots, std::span<double> out) const {
  if (slots.size() < max_slot_) throw DimensionMismatch("program: too few variable slots");
  if (out.size() < outputs_.size()) throw DimensionMismatch("program: output span too small");
  thread_local std::vector<double> reg;
  reg.resize(tape_.size());
  auto fail = [&](std::size_t i, const char* what) -> double {
    throw DomainError(what, print(Expression(source_[i])));
  };
  for (std::size_t i = 0; i < tape_.size(); ++i) {
    const Instr& in = tape_[i];
    const std::uint32_t* op = operands_.data() + in.first;
    double v = 0.0;
    switch (in.op) {
      case Op::Const:
        v = in.value;
        break;
      case Op::Var:
        v = slots[in.slot];
        break;
      case Op::Neg:
        v = -reg[op[0]];
        break;
      case Op::Exp:
        v = std::exp(reg[op[0]]);
        if (!std::isfinite(v)) fail(i, "exp overflow");
        break;
      case Op::Log:
        if (!(reg[op[0]] > 0.0)) fail(i, "log of non-positive value");
        v = std::log(reg[op[0]]);
        break;
      case Op::Sqrt:
        if (!(reg[op[0]] >= 0.0)) fail(i, "sqrt of negative value");
        v = std::sqrt(reg[op[0]]);
        break;
      case Op::Add:
        for (std::uint32_t k = 0; k < in.count; ++k) v += reg[op[k]];
        if (!std::isfinite(v)) fail(i, "non-finite sum");
        break;
      case Op::Mul:
        v = 1.0;
        for (std::uint32_t k = 0; k < in.count; ++k) v *= reg[op[k]];
        if (!std::isfinite(v)) fail(i, "non-finite product");
        break;
      case Op::Div:
        if (reg[op[1]] == 0.0) fail(i, "division by zero");
        v = reg[op[0]] / reg[op[1]];
        if (!std::isfinite(v)) fail(i, "non-finite quotient");
        break;
      case Op::Pow:
        if (reg[op[0]] == 0.0 && in.exponent < 0) fail(i, "division by zero");
        v = std::pow(reg[op[0]], in.exponent);
        if (!std::isfinite(v)) fail(i, "non-finite power");
        break;
    }
    reg[i] = v;
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = reg[outputs_[k]];
}

}  // namespace valfun::expr
