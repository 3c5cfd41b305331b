#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "kpzu/errors.hpp"

namespace kpzu {

/// Arithmetic expression in the variables u and v.
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | u | v | pi | fn '(' expr ')' | '(' expr ')'
///   fn     := sqrt | exp | log | cosh | sinh | abs
///
/// Compiled to a postfix program so evaluation does no allocation.
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text) {
    Parser p{text};
    Expression e;
    e.source_ = text;
    p.expr(e.code_);
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    long sp = 0, peak = 0;
    for (const Op& op : e.code_) {
      if (op.kind == Kind::Num || op.kind == Kind::U || op.kind == Kind::V) ++sp;
      else if (op.kind >= Kind::Add && op.kind <= Kind::Pow) --sp;
      peak = std::max(peak, sp);
    }
    if (peak > kStack) throw ParseError("expression too deeply nested: \"" + text + "\"");
    return e;
  }

  double operator()(double u, double v) const {
    double stack[kStack];
    std::size_t sp = 0;
    for (const Op& op : code_) {
      switch (op.kind) {
        case Kind::Num: stack[sp++] = op.value; break;
        case Kind::U: stack[sp++] = u; break;
        case Kind::V: stack[sp++] = v; break;
        case Kind::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case Kind::Add: --sp; stack[sp - 1] += stack[sp]; break;
        case Kind::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
        case Kind::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
        case Kind::Div: --sp; stack[sp - 1] /= stack[sp]; break;
        case Kind::Pow: --sp; stack[sp - 1] = ipow_or_pow(stack[sp - 1], stack[sp]); break;
        case Kind::Sqrt: stack[sp - 1] = std::sqrt(stack[sp - 1]); break;
        case Kind::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
        case Kind::Log: stack[sp - 1] = std::log(stack[sp - 1]); break;
        case Kind::Cosh: stack[sp - 1] = std::cosh(stack[sp - 1]); break;
        case Kind::Sinh: stack[sp - 1] = std::sinh(stack[sp - 1]); break;
        case Kind::Abs: stack[sp - 1] = std::abs(stack[sp - 1]); break;
      }
    }
    return stack[0];
  }

  const std::string& source() const noexcept { return source_; }
  bool empty() const noexcept { return code_.empty(); }

 private:
  static constexpr long kStack = 64;
  enum class Kind { Num, U, V, Neg, Add, Sub, Mul, Div, Pow, Sqrt, Exp, Log, Cosh, Sinh, Abs };
  struct Op {
    Kind kind;
    double value = 0.0;
  };

  // x^n for small integer n is exact repeated multiplication; the rule
  // tests compare against hand-expanded polynomials.
  static double ipow_or_pow(double x, double e) {
    if (e == std::floor(e) && std::abs(e) <= 16) {
      long n = static_cast<long>(e);
      const bool inv = n < 0;
      if (inv) n = -n;
      double r = 1.0;
      for (long i = 0; i < n; ++i) r *= x;
      return inv ? 1.0 / r : r;
    }
    return std::pow(x, e);
  }

  struct Parser {
    const std::string& s;
    std::size_t pos = 0;
    int depth = 0;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ParseError("expression: " + msg + " at offset " + std::to_string(pos) +
                       " in \"" + s + "\"");
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    void expr(std::vector<Op>& out) {
      term(out);
      for (;;) {
        if (eat('+')) {
          term(out);
          out.push_back({Kind::Add});
        } else if (eat('-')) {
          term(out);
          out.push_back({Kind::Sub});
        } else {
          break;
        }
      }
    }
    void term(std::vector<Op>& out) {
      unary(out);
      for (;;) {
        if (eat('*')) {
          unary(out);
          out.push_back({Kind::Mul});
        } else if (eat('/')) {
          unary(out);
          out.push_back({Kind::Div});
        } else {
          break;
        }
      }
    }
    void unary(std::vector<Op>& out) {
      if (++depth > 200) fail("nesting too deep");
      if (eat('-')) {
        unary(out);
        out.push_back({Kind::Neg});
      } else if (eat('+')) {
        unary(out);
      } else {
        power(out);
      }
      --depth;
    }
    void power(std::vector<Op>& out) {
      atom(out);
      if (eat('^')) {
        unary(out);
        out.push_back({Kind::Pow});
      }
    }
    void atom(std::vector<Op>& out) {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double val = 0.0;
        try {
          val = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("bad number");
        }
        pos += used;
        out.push_back({Kind::Num, val});
        return;
      }
      if (eat('(')) {
        expr(out);
        if (!eat(')')) fail("expected ')'");
        return;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string id = s.substr(start, pos - start);
        if (id == "u") return out.push_back({Kind::U});
        if (id == "v") return out.push_back({Kind::V});
        if (id == "pi") return out.push_back({Kind::Num, std::numbers::pi});
        Kind fn;
        if (id == "sqrt") fn = Kind::Sqrt;
        else if (id == "exp") fn = Kind::Exp;
        else if (id == "log") fn = Kind::Log;
        else if (id == "cosh") fn = Kind::Cosh;
        else if (id == "sinh") fn = Kind::Sinh;
        else if (id == "abs") fn = Kind::Abs;
        else {
          pos = start;
          fail("unknown identifier '" + id + "'");
        }
        if (!eat('(')) fail("expected '(' after " + id);
        expr(out);
        if (!eat(')')) fail("expected ')'");
        out.push_back({fn});
        return;
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  std::string source_;
  std::vector<Op> code_;
};

}  // namespace kpzu
