#pragma once

// Small arithmetic expression language for custom-chart metric coefficients.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | primary
//   primary := number | 'pi' | 'e' | 'x0'..'x3'
//            | fn '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//   fn      := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'
//
// Expressions compile to a postfix program that evaluates on doubles or jets.

#include <array>
#include <string>
#include <vector>

#include "conformal4/jet.hpp"

namespace conformal4 {

class Expression {
 public:
  enum class Op { Constant, Coordinate, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp, Log, Sqrt, Pow };

  struct Instruction {
    Op op;
    double constant = 0.0;
    int coordinate = 0;
  };

  // Throws ParseError carrying the 0-based character offset of the problem.
  static Expression parse(const std::string& source);

  const std::string& source() const { return source_; }
  bool is_constant() const;

  template <class T>
  T evaluate(const std::array<T, 4>& x) const {
    std::vector<T> stack;
    stack.reserve(program_.size());
    for (const Instruction& ins : program_) {
      switch (ins.op) {
        case Op::Constant: stack.emplace_back(ins.constant); break;
        case Op::Coordinate: stack.push_back(x[ins.coordinate]); break;
        case Op::Neg: stack.back() = -stack.back(); break;
        case Op::Sin: stack.back() = sin_(stack.back()); break;
        case Op::Cos: stack.back() = cos_(stack.back()); break;
        case Op::Exp: stack.back() = exp_(stack.back()); break;
        case Op::Log: stack.back() = log_(stack.back()); break;
        case Op::Sqrt: stack.back() = sqrt_(stack.back()); break;
        default: {
          T rhs = stack.back();
          stack.pop_back();
          T& lhs = stack.back();
          switch (ins.op) {
            case Op::Add: lhs = lhs + rhs; break;
            case Op::Sub: lhs = lhs - rhs; break;
            case Op::Mul: lhs = lhs * rhs; break;
            case Op::Div: lhs = lhs / rhs; break;
            case Op::Pow: lhs = pow_(lhs, rhs); break;
            default: break;
          }
        }
      }
    }
    return stack.back();
  }

 private:
  static double sin_(double a) { return std::sin(a); }
  static double cos_(double a) { return std::cos(a); }
  static double exp_(double a) { return std::exp(a); }
  static double log_(double a) { return std::log(a); }
  static double sqrt_(double a) { return std::sqrt(a); }
  static double pow_(double a, double b) { return std::pow(a, b); }
  template <int N> static Jet<N> sin_(const Jet<N>& a) { return sin(a); }
  template <int N> static Jet<N> cos_(const Jet<N>& a) { return cos(a); }
  template <int N> static Jet<N> exp_(const Jet<N>& a) { return exp(a); }
  template <int N> static Jet<N> log_(const Jet<N>& a) { return log(a); }
  template <int N> static Jet<N> sqrt_(const Jet<N>& a) { return sqrt(a); }
  template <int N> static Jet<N> pow_(const Jet<N>& a, const Jet<N>& b) { return pow(a, b); }

  std::string source_;
  std::vector<Instruction> program_;

  friend class ExpressionParser;
};

}  // namespace conformal4
