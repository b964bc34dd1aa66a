#pragma once

// Small arithmetic-expression language for user-supplied mass profiles.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names are the variable `x`, the constants `pi` and `e`, and any parameter
// name supplied at parse time. Functions: sin cos tan tanh cosh sinh exp ln
// sqrt atan.

#include <pctpdm/errors.hpp>

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

namespace pctpdm {

class ParseError : public Error {
public:
  ParseError(std::size_t position, std::set<std::string> expected, const std::string &detail)
      : Error(ErrorKind::ParseError, format(position, expected, detail)), position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::set<std::string> &expected() const noexcept { return expected_; }

private:
  static std::string format(std::size_t position, const std::set<std::string> &expected,
                            const std::string &detail) {
    std::string msg = detail + " at position " + std::to_string(position);
    if (!expected.empty()) {
      msg += "; expected one of {";
      bool first = true;
      for (const auto &e : expected) {
        if (!first) msg += ", ";
        msg += e;
        first = false;
      }
      msg += "}";
    }
    return msg;
  }

  std::size_t position_;
  std::set<std::string> expected_;
};

class Expression {
public:
  using Params = std::map<std::string, double>;

  static Expression parse(const std::string &text, const Params &params = {}) {
    Parser p{text, params};
    auto root = p.parse_all();
    return Expression(std::move(root), text);
  }

  double operator()(double x) const { return root_->eval(x); }
  const std::string &text() const noexcept { return text_; }

private:
  enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn { Sin, Cos, Tan, Tanh, Cosh, Sinh, Exp, Ln, Sqrt, Atan };

  struct Node {
    Op op;
    double value = 0.0;
    Fn fn = Fn::Sin;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x) const {
      switch (op) {
      case Op::Num: return value;
      case Op::Var: return x;
      case Op::Neg: return -lhs->eval(x);
      case Op::Add: return lhs->eval(x) + rhs->eval(x);
      case Op::Sub: return lhs->eval(x) - rhs->eval(x);
      case Op::Mul: return lhs->eval(x) * rhs->eval(x);
      case Op::Div: return lhs->eval(x) / rhs->eval(x);
      case Op::Pow: {
        const double base = lhs->eval(x);
        const double expo = rhs->eval(x);
        if (expo == 2.0) return base * base;
        return std::pow(base, expo);
      }
      case Op::Call: return apply(fn, lhs->eval(x));
      }
      return std::nan("");
    }
  };
  using NodePtr = std::shared_ptr<const Node>;

  static double apply(Fn fn, double v) {
    switch (fn) {
    case Fn::Sin: return std::sin(v);
    case Fn::Cos: return std::cos(v);
    case Fn::Tan: return std::tan(v);
    case Fn::Tanh: return std::tanh(v);
    case Fn::Cosh: return std::cosh(v);
    case Fn::Sinh: return std::sinh(v);
    case Fn::Exp: return std::exp(v);
    case Fn::Ln: return std::log(v);
    case Fn::Sqrt: return std::sqrt(v);
    case Fn::Atan: return std::atan(v);
    }
    return std::nan("");
  }

  static const std::map<std::string, Fn> &functions() {
    static const std::map<std::string, Fn> table{
        {"sin", Fn::Sin},   {"cos", Fn::Cos}, {"tan", Fn::Tan}, {"tanh", Fn::Tanh},
        {"cosh", Fn::Cosh}, {"sinh", Fn::Sinh}, {"exp", Fn::Exp}, {"ln", Fn::Ln},
        {"sqrt", Fn::Sqrt}, {"atan", Fn::Atan}};
    return table;
  }

  struct Parser {
    const std::string &src;
    const Params &params;
    std::size_t pos = 0;

    static NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
      auto n = std::make_shared<Node>();
      n->op = op;
      n->lhs = std::move(l);
      n->rhs = std::move(r);
      return n;
    }
    static NodePtr number(double v) {
      auto n = std::make_shared<Node>();
      n->op = Op::Num;
      n->value = v;
      return n;
    }

    void skip() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < src.size() && src[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    std::set<std::string> operand_expected() const {
      return {"number", "identifier", "'('", "'-'", "'+'"};
    }

    NodePtr parse_all() {
      auto root = expr();
      skip();
      if (pos != src.size()) {
        throw ParseError(pos, {"operator", "end of input"},
                         std::string("unexpected character '") + src[pos] + "'");
      }
      return root;
    }

    NodePtr expr() {
      auto lhs = term();
      for (;;) {
        if (accept('+')) lhs = make(Op::Add, lhs, term());
        else if (accept('-')) lhs = make(Op::Sub, lhs, term());
        else return lhs;
      }
    }

    NodePtr term() {
      auto lhs = unary();
      for (;;) {
        if (accept('*')) lhs = make(Op::Mul, lhs, unary());
        else if (accept('/')) lhs = make(Op::Div, lhs, unary());
        else return lhs;
      }
    }

    NodePtr unary() {
      if (accept('-')) return make(Op::Neg, unary());
      if (accept('+')) return unary();
      return power();
    }

    NodePtr power() {
      auto base = primary();
      if (accept('^')) return make(Op::Pow, base, unary());
      return base;
    }

    NodePtr primary() {
      skip();
      if (pos >= src.size()) throw ParseError(pos, operand_expected(), "unexpected end of input");
      const char c = src[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
      if (accept('(')) {
        auto inner = expr();
        if (!accept(')')) throw ParseError(pos, {"')'", "operator"}, "unbalanced parenthesis");
        return inner;
      }
      throw ParseError(pos, operand_expected(), std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
      const std::size_t start = pos;
      const char *begin = src.c_str() + pos;
      char *end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError(start, {"number"}, "malformed number");
      pos += static_cast<std::size_t>(end - begin);
      return number(v);
    }

    NodePtr parse_name() {
      const std::size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      const std::string name = src.substr(start, pos - start);
      if (auto f = functions().find(name); f != functions().end()) {
        if (!accept('(')) throw ParseError(pos, {"'('"}, "function '" + name + "' needs '('");
        auto arg = expr();
        if (!accept(')')) throw ParseError(pos, {"')'", "operator"}, "unbalanced parenthesis");
        auto n = std::make_shared<Node>();
        n->op = Op::Call;
        n->fn = f->second;
        n->lhs = std::move(arg);
        return n;
      }
      if (name == "x") return make(Op::Var);
      if (name == "pi") return number(std::numbers::pi);
      if (name == "e") return number(std::numbers::e);
      if (auto p = params.find(name); p != params.end()) return number(p->second);
      std::set<std::string> expected{"x", "pi", "e"};
      for (const auto &[k, v] : params) expected.insert(k);
      for (const auto &[k, v] : functions()) expected.insert(k);
      throw ParseError(start, expected, "unknown identifier '" + name + "'");
    }
  };

  Expression(NodePtr root, std::string text) : root_(std::move(root)), text_(std::move(text)) {}

  NodePtr root_;
  std::string text_;
};

} // namespace pctpdm
