#include <cctype>
#include <cstdlib>
#include <string>

#include "valfun/error.hpp"
#include "valfun/expr.hpp"

namespace valfun::expr {

namespace {

class Parser {
 public:
  Parser(std::string_view src, const VariableTable& table) : src_(src), table_(table) {}

  Expression run() {
    Expression e = expr();
    skip();
    if (pos_ != src_.size()) throw SyntaxError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  std::string_view src_;
  const VariableTable& table_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < src_.size() && src_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) {
      if (pos_ >= src_.size()) throw SyntaxError(std::string("expected '") + c + "' before end of input", pos_);
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  Expression expr() {
    std::vector<Expression> terms{term()};
    while (true) {
      if (peek('+')) {
        ++pos_;
        terms.push_back(term());
      } else if (peek('-')) {
        ++pos_;
        terms.push_back(unary(Op::Neg, term()));
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : nary(Op::Add, std::move(terms));
  }

  Expression term() {
    std::vector<Expression> run{factor()};
    auto collapse = [&] { return run.size() == 1 ? run.front() : nary(Op::Mul, run); };
    while (true) {
      if (peek('*')) {
        ++pos_;
        run.push_back(factor());
      } else if (peek('/')) {
        ++pos_;
        Expression lhs = collapse();
        run = {divide(lhs, factor())};
      } else {
        break;
      }
    }
    return collapse();
  }

  Expression factor() {
    if (peek('-')) {
      ++pos_;
      skip();
      std::size_t save = pos_;
      if (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        double v = number();
        if (!peek('^')) return constant(-v);
        pos_ = save;
      }
      return unary(Op::Neg, factor());
    }
    Expression b = base();
    if (peek('^')) {
      ++pos_;
      return power(b, integer());
    }
    return b;
  }

  int integer() {
    skip();
    std::size_t start = pos_;
    bool neg = false;
    if (pos_ < src_.size() && src_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    std::size_t digits = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == digits) throw SyntaxError("expected integer exponent", start);
    if (pos_ - digits > 6) throw SyntaxError("exponent too large", start);
    int k = std::stoi(std::string(src_.substr(digits, pos_ - digits)));
    return neg ? -k : k;
  }

  double number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t s = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t whole = digits();
    std::size_t frac = 0;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      frac = digits();
    }
    if (whole + frac == 0) throw SyntaxError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError("malformed exponent in number", mark);
    }
    std::string text(src_.substr(start, pos_ - start));
    return std::strtod(text.c_str(), nullptr);
  }

  Expression base() {
    skip();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expression e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return constant(number());
    if (std::islower(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::islower(static_cast<unsigned char>(src_[pos_])) ||
              std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      if (peek('(')) {
        Op op;
        if (name == "exp") op = Op::Exp;
        else if (name == "log") op = Op::Log;
        else if (name == "sqrt") op = Op::Sqrt;
        else if (name == "neg") op = Op::Neg;
        else throw SyntaxError("unknown function '" + name + "'", start);
        ++pos_;
        Expression a = expr();
        expect(')');
        return unary(op, a);
      }
      auto slot = table_.find(name);
      if (!slot) throw UnknownVariable(name);
      return variable(name, *slot);
    }
    throw SyntaxError("unexpected '" + std::string(1, c) + "'", pos_);
  }
};

}  // namespace

Expression parse(std::string_view source, const VariableTable& table) {
  return Parser(source, table).run();
}

}  // namespace valfun::expr
