#ifndef COEXIST_EXPR_HPP
#define COEXIST_EXPR_HPP

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "coexist/errors.hpp"

namespace coexist {

// Small expression language for scalar fields of (t, x, y):
//   ops: + - * / ^ (right-assoc), unary minus
//   functions: sin cos exp sqrt abs
//   constants: numeric literals and pi
// Fractional powers require a nonnegative base; evaluation failures raise
// EvaluationError rather than propagating NaN/inf into numerics.
class Expression {
  struct Node {
    enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Abs };
    Kind kind{};
    double number = 0.0;
    int var = 0;  // 0 = t, 1 = x, 2 = y
    std::unique_ptr<Node> a, b;
  };

 public:
  Expression() = default;

  static Expression parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.source_ = text;
    e.root_ = std::shared_ptr<const Node>(p.parse_all().release());
    return e;
  }

  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }

  double operator()(double t, double x, double y) const {
    if (!root_) throw EvaluationError("expression: empty");
    const double v = eval(*root_, t, x, y);
    if (!std::isfinite(v)) {
      throw EvaluationError("expression '" + source_ + "': non-finite value");
    }
    return v;
  }

 private:
  static double eval(const Node& n, double t, double x, double y) {
    using K = Node::Kind;
    switch (n.kind) {
      case K::Number: return n.number;
      case K::Var: return n.var == 0 ? t : (n.var == 1 ? x : y);
      case K::Add: return eval(*n.a, t, x, y) + eval(*n.b, t, x, y);
      case K::Sub: return eval(*n.a, t, x, y) - eval(*n.b, t, x, y);
      case K::Mul: return eval(*n.a, t, x, y) * eval(*n.b, t, x, y);
      case K::Div: return eval(*n.a, t, x, y) / eval(*n.b, t, x, y);
      case K::Neg: return -eval(*n.a, t, x, y);
      case K::Sin: return std::sin(eval(*n.a, t, x, y));
      case K::Cos: return std::cos(eval(*n.a, t, x, y));
      case K::Exp: return std::exp(eval(*n.a, t, x, y));
      case K::Abs: return std::fabs(eval(*n.a, t, x, y));
      case K::Sqrt: {
        const double b = eval(*n.a, t, x, y);
        if (b < 0.0) throw EvaluationError("expression: sqrt of a negative value");
        return std::sqrt(b);
      }
      case K::Pow: {
        const double base = eval(*n.a, t, x, y);
        const double ex = eval(*n.b, t, x, y);
        if (base < 0.0 && std::rint(ex) != ex) {
          throw EvaluationError("expression: fractional power of a negative base");
        }
        return std::pow(base, ex);
      }
    }
    throw EvaluationError("expression: corrupt node");
  }

  class Parser {
   public:
    explicit Parser(const std::string& s) : s_(s) {}

    std::unique_ptr<Node> parse_all() {
      auto e = parse_expr();
      skip_ws();
      if (pos_ != s_.size()) fail("trailing input");
      return e;
    }

   private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
      throw ParseError("expression '" + s_ + "' at position " + std::to_string(pos_) + ": " + what);
    }

    void skip_ws() {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == c) {
        ++pos_;
        return true;
      }
      return false;
    }

    char peek() {
      skip_ws();
      return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    std::unique_ptr<Node> make(Node::Kind k, std::unique_ptr<Node> a = nullptr,
                               std::unique_ptr<Node> b = nullptr) {
      auto n = std::make_unique<Node>();
      n->kind = k;
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }

    std::unique_ptr<Node> parse_expr() {
      auto lhs = parse_term();
      for (;;) {
        if (eat('+')) lhs = make(Node::Kind::Add, std::move(lhs), parse_term());
        else if (eat('-')) lhs = make(Node::Kind::Sub, std::move(lhs), parse_term());
        else return lhs;
      }
    }

    std::unique_ptr<Node> parse_term() {
      auto lhs = parse_unary();
      for (;;) {
        if (eat('*')) lhs = make(Node::Kind::Mul, std::move(lhs), parse_unary());
        else if (eat('/')) lhs = make(Node::Kind::Div, std::move(lhs), parse_unary());
        else return lhs;
      }
    }

    std::unique_ptr<Node> parse_unary() {
      if (eat('-')) return make(Node::Kind::Neg, parse_unary());
      return parse_power();
    }

    std::unique_ptr<Node> parse_power() {
      auto base = parse_primary();
      if (eat('^')) return make(Node::Kind::Pow, std::move(base), parse_unary());
      return base;
    }

    std::unique_ptr<Node> parse_primary() {
      skip_ws();
      if (pos_ >= s_.size()) fail("unexpected end of input");
      const char c = s_[pos_];

      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v;
        try {
          v = std::stod(s_.substr(pos_), &used);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos_ += used;
        auto n = make(Node::Kind::Number);
        n->number = v;
        return n;
      }

      if (c == '(') {
        ++pos_;
        auto e = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }

      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t end = pos_;
        while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
        const std::string word = s_.substr(pos_, end - pos_);
        pos_ = end;

        if (word == "pi") {
          auto n = make(Node::Kind::Number);
          n->number = 3.14159265358979323846;
          return n;
        }
        if (word == "t" || word == "x" || word == "y") {
          auto n = make(Node::Kind::Var);
          n->var = word == "t" ? 0 : (word == "x" ? 1 : 2);
          return n;
        }

        Node::Kind k;
        if (word == "sin") k = Node::Kind::Sin;
        else if (word == "cos") k = Node::Kind::Cos;
        else if (word == "exp") k = Node::Kind::Exp;
        else if (word == "sqrt") k = Node::Kind::Sqrt;
        else if (word == "abs") k = Node::Kind::Abs;
        else fail("unknown identifier '" + word + "'");

        if (!eat('(')) fail("expected '(' after function name");
        auto arg = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return make(k, std::move(arg));
      }

      fail(std::string("unexpected character '") + c + "'");
    }
  };

  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace coexist

#endif
