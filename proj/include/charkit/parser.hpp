#pragma once

// Text format for PDE systems (.pde):
//
//   # comment
//   indep x, t;
//   dep u;
//   param m;
//   eq d(u,t,t) - d(u,x,x) + m^2*u = 0;
//
// Derivatives are written d(dep, indep, ...); `im` is the imaginary unit and
// exponents are non-negative integer literals.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "charkit/error.hpp"
#include "charkit/expr.hpp"

namespace charkit {

/// A parsed system F^a(x, u_I) = 0, stored as lhs - rhs.
struct PDESystem {
  Naming names;                     // independent and dependent names
  std::vector<std::string> params;  // symbolic parameters
  Env param_values;                 // optional numeric bindings
  std::vector<Expr> equations;
  std::vector<Expr> lhs;
  std::vector<Expr> rhs;
  int order = 0;

  int n() const { return static_cast<int>(names.indep.size()); }
  int m() const { return static_cast<int>(names.dep.size()); }
  int equation_count() const { return static_cast<int>(equations.size()); }
  bool determined() const { return equation_count() == m(); }

  /// Round-trips through parse_system.
  std::string canonical() const {
    std::string out;
    auto list = [&](const char* kw, const std::vector<std::string>& names) {
      if (names.empty()) return;
      out += kw;
      for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : " ") + names[i];
      out += ";\n";
    };
    list("indep", names.indep);
    list("dep", names.dep);
    if (!params.empty()) {
      out += "param";
      for (std::size_t i = 0; i < params.size(); ++i) {
        out += (i ? ", " : " ") + params[i];
        if (auto it = param_values.find(VarRef::param(params[i])); it != param_values.end())
          out += " = " + format_double(it->second.real());
      }
      out += ";\n";
    }
    for (std::size_t i = 0; i < equations.size(); ++i)
      out += "eq " + to_string(lhs[i], names) + " = " + to_string(rhs[i], names) + ";\n";
    return out;
  }
};

/// Names visible while parsing an expression. Identifiers in `aux` become
/// auxiliary symbols (Cauchy parameters, covector components, ...).
struct Scope {
  Naming names;
  std::vector<std::string> params;
  std::vector<std::string> aux;
};

namespace detail {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  bool integral = false;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t start = pos_;
        bool integral = true;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
          integral = false;
          advance();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          std::size_t save = pos_;
          int save_col = col_;
          advance();
          if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
          if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            integral = false;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
          } else {
            pos_ = save;
            col_ = save_col;
          }
        }
        t.kind = Tok::Number;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
          throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
        t.integral = integral;
      } else if (std::string_view("+-*/^(),;=").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
        advance();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline bool is_reserved(const std::string& s) {
  static const char* kw[] = {"indep", "dep", "param", "eq", "d", "sin", "cos", "exp", "sqrt", "im"};
  return std::any_of(std::begin(kw), std::end(kw), [&](const char* k) { return s == k; });
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Scope scope) : toks_(std::move(toks)), scope_(std::move(scope)) {}

  PDESystem system() {
    PDESystem sys;
    while (peek_ident("indep") || peek_ident("dep") || peek_ident("param")) declaration();
    sys.names = scope_.names;
    sys.params = scope_.params;
    sys.param_values = scope_values_;
    if (sys.names.indep.empty()) fail_here("no independent variables declared");
    if (sys.names.dep.empty()) fail_here("no dependent variables declared");
    while (peek_ident("eq")) {
      next();
      Expr l = expr();
      expect("=");
      Expr r = expr();
      expect(";");
      sys.lhs.push_back(l);
      sys.rhs.push_back(r);
      sys.equations.push_back(l - r);
    }
    if (sys.equations.empty()) fail_here("empty equation list");
    if (peek().kind != Tok::End) fail_here("expected 'eq' or end of input, found '" + peek().text + "'");
    sys.order = max_order_;
    if (sys.order < 1) throw ParseError("system contains no derivatives (order must be >= 1)", 1, 1);
    return sys;
  }

  Expr single_expression() {
    Expr e = expr();
    if (peek().kind != Tok::End) fail_here("unexpected '" + peek().text + "' after expression");
    return e;
  }

  int max_order() const { return max_order_; }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool peek_punct(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool peek_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const { throw ParseError(msg, t.line, t.column); }
  [[noreturn]] void fail_here(const std::string& msg) const { fail(msg, peek()); }

  void expect(const char* p) {
    if (!peek_punct(p)) {
      std::string found = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
      fail_here(std::string("expected '") + p + "', found " + found);
    }
    next();
  }

  bool declared(const std::string& s) const {
    auto has = [&](const std::vector<std::string>& v) { return std::find(v.begin(), v.end(), s) != v.end(); };
    return has(scope_.names.indep) || has(scope_.names.dep) || has(scope_.params) || has(scope_.aux);
  }

  void declaration() {
    std::string kw = next().text;
    auto& target = kw == "indep" ? scope_.names.indep : kw == "dep" ? scope_.names.dep : scope_.params;
    for (;;) {
      const Token& t = peek();
      if (t.kind != Tok::Ident) fail_here("expected identifier in '" + kw + "' declaration");
      if (is_reserved(t.text)) fail_here("'" + t.text + "' is a reserved word");
      if (declared(t.text)) fail_here("duplicate declaration of '" + t.text + "'");
      target.push_back(t.text);
      next();
      if (kw == "param" && peek_punct("=")) {
        next();
        double sign = 1.0;
        if (peek_punct("-")) {
          next();
          sign = -1.0;
        }
        if (peek().kind != Tok::Number) fail_here("expected a number after '='");
        scope_values_[VarRef::param(target.back())] = sign * next().number;
      }
      if (peek_punct(",")) {
        next();
        continue;
      }
      expect(";");
      return;
    }
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (peek_punct("+")) {
        next();
        e = e + term();
      } else if (peek_punct("-")) {
        next();
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (peek_punct("*")) {
        next();
        e = e * unary();
      } else if (peek_punct("/")) {
        next();
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (peek_punct("-")) {
      next();
      return -unary();
    }
    if (peek_punct("+")) {
      next();
      return unary();
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!peek_punct("^")) return base;
    next();
    const Token& at = peek();
    Expr ex = unary();
    if (!ex.is_const() || ex.value().imag() != 0.0 || ex.value().real() < 0.0 ||
        std::floor(ex.value().real()) != ex.value().real() || ex.value().real() > 1e6)
      fail("exponent must be a non-negative integer", at);
    return pow(base, static_cast<int>(ex.value().real()));
  }

  int indep_ordinal(const Token& t) const {
    const auto& v = scope_.names.indep;
    auto it = std::find(v.begin(), v.end(), t.text);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  }
  int dep_ordinal(const Token& t) const {
    const auto& v = scope_.names.dep;
    auto it = std::find(v.begin(), v.end(), t.text);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  }

  Expr derivative() {
    expect("(");
    const Token& dep_tok = peek();
    if (dep_tok.kind != Tok::Ident) fail_here("expected dependent variable name in d(...)");
    int b = dep_ordinal(dep_tok);
    if (b < 0) {
      if (declared(dep_tok.text)) fail(("derivative of non-dependent name '" + dep_tok.text + "'"), dep_tok);
      fail("undeclared identifier '" + dep_tok.text + "'", dep_tok);
    }
    next();
    std::vector<int> idx;
    while (peek_punct(",")) {
      next();
      const Token& t = peek();
      if (t.kind != Tok::Ident) fail_here("expected independent variable name in d(...)");
      int i = indep_ordinal(t);
      if (i < 0) {
        if (declared(t.text)) fail("'" + t.text + "' is not an independent variable", t);
        fail("undeclared identifier '" + t.text + "'", t);
      }
      idx.push_back(i);
      next();
    }
    expect(")");
    max_order_ = std::max(max_order_, static_cast<int>(idx.size()));
    return Expr(VarRef::jet(b, MultiIndex(idx)));
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      return Expr(t.number);
    }
    if (peek_punct("(")) {
      next();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.kind != Tok::Ident) {
      std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
      fail_here("expected expression, found " + found);
    }
    next();
    if (t.text == "im") return Expr(Complex(0.0, 1.0));
    if (t.text == "d" && peek_punct("(")) return derivative();
    static const std::map<std::string, Fn> funcs{
        {"sin", Fn::Sin}, {"cos", Fn::Cos}, {"exp", Fn::Exp}, {"sqrt", Fn::Sqrt}};
    if (auto it = funcs.find(t.text); it != funcs.end()) {
      expect("(");
      Expr arg = expr();
      expect(")");
      return Expr::make_func(it->second, arg);
    }
    if (int i = indep_ordinal(t); i >= 0) return Expr(VarRef::indep(i));
    if (int b = dep_ordinal(t); b >= 0) return Expr(VarRef::jet(b));
    const auto& ps = scope_.params;
    if (std::find(ps.begin(), ps.end(), t.text) != ps.end()) return Expr(VarRef::param(t.text));
    const auto& ax = scope_.aux;
    if (std::find(ax.begin(), ax.end(), t.text) != ax.end()) return Expr(VarRef::aux(t.text));
    fail("undeclared identifier '" + t.text + "'", t);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Scope scope_;
  Env scope_values_;
  int max_order_ = 0;
};

}  // namespace detail

inline PDESystem parse_system(std::string_view text) {
  detail::Parser p(detail::Lexer(text).run(), Scope{});
  return p.system();
}

/// Parses a standalone expression against the given scope.
inline Expr parse_expression(std::string_view text, const Scope& scope) {
  detail::Parser p(detail::Lexer(text).run(), scope);
  return p.single_expression();
}

inline Scope scope_of(const PDESystem& sys, std::vector<std::string> aux = {}) {
  return Scope{sys.names, sys.params, std::move(aux)};
}

}  // namespace charkit
