#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "valfun/expr.hpp"

namespace valfun::expr {

/// A batch of expressions flattened into one instruction tape. Nodes shared by
/// pointer (derivative trees reuse their operands) are evaluated once per run.
class Program {
 public:
  Program() = default;
  explicit Program(const std::vector<Expression>& outputs);

  std::size_t num_outputs() const noexcept { return outputs_.size(); }
  std::size_t tape_size() const noexcept { return tape_.size(); }

  /// Evaluates every output; throws DomainError like `evaluate`.
  void run(std::span<const double> slots, std::span<double> out) const;

 private:
  struct Instr {
    Op op;
    int exponent;
    double value;
    std::uint32_t slot;
    std::uint32_t first;  // offset into operands_
    std::uint32_t count;
  };
  std::vector<Instr> tape_;
  std::vector<std::uint32_t> operands_;
  std::vector<std::uint32_t> outputs_;
  std::vector<NodePtr> source_;  // for error messages
  std::size_t max_slot_ = 0;
};

}  // namespace valfun::expr
