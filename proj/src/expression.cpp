#include "conformal4/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "conformal4/errors.hpp"

namespace conformal4 {

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& src) : src_(src) {}

  Expression run() {
    Expression e;
    e.source_ = src_;
    out_ = &e.program_;
    skip_space();
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    expr();
    skip_space();
    if (pos_ != src_.size())
      throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  using Op = Expression::Op;

  void emit(Op op, double c = 0.0, int coord = 0) { out_->push_back({op, c, coord}); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size())
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::Add);
      } else if (accept('-')) {
        term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::Mul);
      } else if (accept('/')) {
        unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::Neg);
    } else if (accept('+')) {
      unary();
    } else {
      primary();
    }
  }

  void primary() {
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      identifier();
      return;
    }
    if (accept('(')) {
      expr();
      expect(')');
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  void number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text = src_.substr(start, pos_ - start);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + text + "'", start);
    }
    if (used != text.size()) throw ParseError("malformed number '" + text + "'", start);
    emit(Op::Constant, value);
  }

  void identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name = src_.substr(start, pos_ - start);

    if (name == "pi") return emit(Op::Constant, std::numbers::pi);
    if (name == "e") return emit(Op::Constant, std::numbers::e);
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '0' && name[1] <= '3')
      return emit(Op::Coordinate, 0.0, name[1] - '0');

    Op fn;
    if (name == "sin") fn = Op::Sin;
    else if (name == "cos") fn = Op::Cos;
    else if (name == "exp") fn = Op::Exp;
    else if (name == "log") fn = Op::Log;
    else if (name == "sqrt") fn = Op::Sqrt;
    else if (name == "pow") fn = Op::Pow;
    else throw ParseError("unknown identifier '" + name + "'", start);

    expect('(');
    expr();
    if (fn == Op::Pow) {
      expect(',');
      expr();
    }
    expect(')');
    emit(fn);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  std::vector<Expression::Instruction>* out_ = nullptr;
};

Expression Expression::parse(const std::string& source) { return ExpressionParser(source).run(); }

bool Expression::is_constant() const {
  for (const auto& ins : program_)
    if (ins.op == Op::Coordinate) return false;
  return true;
}

}  // namespace conformal4
