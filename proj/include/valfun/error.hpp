#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace valfun {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(std::string name)
      : Error("unknown variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Raised when log/sqrt/div (or an overflowing exp) leaves its domain.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string node)
      : Error(what + " in '" + node + "'"), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

#define VALFUN_SIMPLE_ERROR(Name)      \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  };

VALFUN_SIMPLE_ERROR(FormatError)
VALFUN_SIMPLE_ERROR(DimensionMismatch)
VALFUN_SIMPLE_ERROR(InfeasiblePoint)
VALFUN_SIMPLE_ERROR(NotDualFeasible)
VALFUN_SIMPLE_ERROR(NotKktPoint)
VALFUN_SIMPLE_ERROR(NotMpecFeasible)
VALFUN_SIMPLE_ERROR(PatternLimitExceeded)
VALFUN_SIMPLE_ERROR(CycleGuardExceeded)
VALFUN_SIMPLE_ERROR(DimensionTooLarge)
VALFUN_SIMPLE_ERROR(NoFeasiblePoint)
VALFUN_SIMPLE_ERROR(NoConvergedStart)
VALFUN_SIMPLE_ERROR(VerificationFailed)
VALFUN_SIMPLE_ERROR(Unsupported)

#undef VALFUN_SIMPLE_ERROR

}  // namespace valfun
