#pragma once
// Coefficient expressions: arithmetic over numbers, the variables x, y, z, pi and
// the functions sin, cos, exp, abs, step(a, b) = b * [z >= a].
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('+'|'-') factor | base ('^' base)?
//   base   := number | ident | ident '(' args ')' | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "acbc/errors.hpp"

namespace acbc::expr {

struct Vars {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t pos, const std::string& msg)
      : ConfigError("expression parse error at position " + std::to_string(pos) + ": " + msg), pos_(pos) {}
  std::size_t position() const noexcept { return pos_; }

 private:
  std::size_t pos_;
};

class EvalError : public ModelError {
 public:
  using ModelError::ModelError;
};

class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    auto root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError(p.pos, "unexpected '" + std::string(1, text[p.pos]) + "'");
    Expression e;
    e.root_ = std::move(root);
    e.source_ = std::string(text);
    return e;
  }

  double eval(const Vars& v) const { return eval_node(*root_, v); }
  bool is_constant() const { return !uses_variables(*root_); }
  const std::string& source() const { return source_; }

 private:
  enum class Kind { number, var, neg, add, sub, mul, div, pow, call };
  enum class Var { x, y, z, pi };
  enum class Fn { sin, cos, exp, abs, step };

  struct Node {
    Kind kind = Kind::number;
    double value = 0.0;
    Var var = Var::x;
    Fn fn = Fn::sin;
    std::size_t pos = 0;
    std::vector<std::unique_ptr<Node>> kids;
  };
  using NodePtr = std::unique_ptr<Node>;

  struct Parser {
    std::string_view s;
    std::size_t pos;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    NodePtr make(Kind k, std::size_t at) {
      auto n = std::make_unique<Node>();
      n->kind = k;
      n->pos = at;
      return n;
    }
    NodePtr binary(Kind k, std::size_t at, NodePtr l, NodePtr r) {
      auto n = make(k, at);
      n->kids.push_back(std::move(l));
      n->kids.push_back(std::move(r));
      return n;
    }

    NodePtr parse_expr() {
      auto lhs = parse_term();
      for (;;) {
        skip_ws();
        std::size_t at = pos;
        if (accept('+')) lhs = binary(Kind::add, at, std::move(lhs), parse_term());
        else if (accept('-')) lhs = binary(Kind::sub, at, std::move(lhs), parse_term());
        else return lhs;
      }
    }
    NodePtr parse_term() {
      auto lhs = parse_factor();
      for (;;) {
        skip_ws();
        std::size_t at = pos;
        if (accept('*')) lhs = binary(Kind::mul, at, std::move(lhs), parse_factor());
        else if (accept('/')) lhs = binary(Kind::div, at, std::move(lhs), parse_factor());
        else return lhs;
      }
    }
    NodePtr parse_factor() {
      skip_ws();
      std::size_t at = pos;
      if (accept('-')) {
        auto n = make(Kind::neg, at);
        n->kids.push_back(parse_factor());
        return n;
      }
      if (accept('+')) return parse_factor();
      auto b = parse_base();
      skip_ws();
      at = pos;
      if (accept('^')) return binary(Kind::pow, at, std::move(b), parse_base());
      return b;
    }
    NodePtr parse_base() {
      skip_ws();
      if (pos >= s.size()) throw ParseError(pos, "unexpected end of input");
      std::size_t at = pos;
      char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        std::string id(s.substr(start, pos - start));
        skip_ws();
        if (pos < s.size() && s[pos] == '(') {
          ++pos;
          return parse_call(id, at);
        }
        auto n = make(Kind::var, at);
        if (id == "x") n->var = Var::x;
        else if (id == "y") n->var = Var::y;
        else if (id == "z") n->var = Var::z;
        else if (id == "pi") n->var = Var::pi;
        else throw ParseError(at, "unknown identifier '" + id + "'");
        return n;
      }
      if (accept('(')) {
        auto e = parse_expr();
        if (!accept(')')) throw ParseError(pos, "expected ')'");
        return e;
      }
      throw ParseError(at, "unexpected '" + std::string(1, c) + "'");
    }
    NodePtr parse_number() {
      std::size_t at = pos;
      std::size_t end = pos;
      while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) ++end;
      if (end < s.size() && (s[end] == 'e' || s[end] == 'E')) {
        std::size_t e = end + 1;
        if (e < s.size() && (s[e] == '+' || s[e] == '-')) ++e;
        if (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
          end = e;
          while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
        }
      }
      std::string tok(s.substr(at, end - at));
      char* stop = nullptr;
      double v = std::strtod(tok.c_str(), &stop);
      if (stop != tok.c_str() + tok.size() || tok == ".") throw ParseError(at, "malformed number '" + tok + "'");
      pos = end;
      auto n = make(Kind::number, at);
      n->value = v;
      return n;
    }
    NodePtr parse_call(const std::string& id, std::size_t at) {
      auto n = make(Kind::call, at);
      std::size_t arity = 1;
      if (id == "sin") n->fn = Fn::sin;
      else if (id == "cos") n->fn = Fn::cos;
      else if (id == "exp") n->fn = Fn::exp;
      else if (id == "abs") n->fn = Fn::abs;
      else if (id == "step") { n->fn = Fn::step; arity = 2; }
      else throw ParseError(at, "unknown function '" + id + "'");
      n->kids.push_back(parse_expr());
      while (accept(',')) n->kids.push_back(parse_expr());
      if (!accept(')')) throw ParseError(pos, "expected ')' closing call to " + id);
      if (n->kids.size() != arity)
        throw ParseError(at, id + " takes " + std::to_string(arity) + " argument(s), got " + std::to_string(n->kids.size()));
      return n;
    }
  };

  static bool uses_variables(const Node& n) {
    if (n.kind == Kind::var) return n.var != Var::pi;
    if (n.kind == Kind::call && n.fn == Fn::step) return true;
    for (const auto& k : n.kids)
      if (uses_variables(*k)) return true;
    return false;
  }

  static double eval_node(const Node& n, const Vars& v) {
    switch (n.kind) {
      case Kind::number: return n.value;
      case Kind::var:
        switch (n.var) {
          case Var::x: return v.x;
          case Var::y: return v.y;
          case Var::z: return v.z;
          case Var::pi: return 3.14159265358979323846;
        }
        break;
      case Kind::neg: return -eval_node(*n.kids[0], v);
      case Kind::add: return eval_node(*n.kids[0], v) + eval_node(*n.kids[1], v);
      case Kind::sub: return eval_node(*n.kids[0], v) - eval_node(*n.kids[1], v);
      case Kind::mul: return eval_node(*n.kids[0], v) * eval_node(*n.kids[1], v);
      case Kind::div: {
        double den = eval_node(*n.kids[1], v);
        if (den == 0.0) throw EvalError("division by zero in '/' at position " + std::to_string(n.pos));
        return eval_node(*n.kids[0], v) / den;
      }
      case Kind::pow: return std::pow(eval_node(*n.kids[0], v), eval_node(*n.kids[1], v));
      case Kind::call: {
        double a = eval_node(*n.kids[0], v);
        switch (n.fn) {
          case Fn::sin: return std::sin(a);
          case Fn::cos: return std::cos(a);
          case Fn::exp: return std::exp(a);
          case Fn::abs: return std::abs(a);
          case Fn::step: return v.z >= a ? eval_node(*n.kids[1], v) : 0.0;
        }
        break;
      }
    }
    return 0.0;
  }

  std::shared_ptr<const Node> root_;
  std::string source_;
};

inline double evaluate(std::string_view text, const Vars& v) { return Expression::parse(text).eval(v); }

}  // namespace acbc::expr
