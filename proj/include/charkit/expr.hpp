#pragma once

// Immutable symbolic expressions over independent variables, jet coordinates,
// parameters and auxiliary symbols. Nodes are shared and never mutated, so an
// Expr can be copied freely and used from several threads.

#include <algorithm>
#include <charconv>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "charkit/error.hpp"

namespace charkit {

using Complex = std::complex<double>;

/// Sorted list of independent-variable ordinals; repeated entries encode
/// repeated differentiation. The empty index is the unknown itself.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
  }
  MultiIndex(std::initializer_list<int> indices) : MultiIndex(std::vector<int>(indices)) {}

  int order() const { return static_cast<int>(indices_.size()); }
  const std::vector<int>& indices() const { return indices_; }

  /// Multiplicity of ordinal i in the index.
  int count(int i) const { return static_cast<int>(std::count(indices_.begin(), indices_.end(), i)); }

  MultiIndex with(int i) const {
    auto next = indices_;
    next.push_back(i);
    return MultiIndex(std::move(next));
  }

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> indices_;
};

/// All sorted multi-indices of the given order over n ordinals, in
/// lexicographic order.
inline std::vector<MultiIndex> sorted_indices(int n, int order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == order) {
      out.emplace_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

/// Reference to a symbol appearing in an expression.
struct VarRef {
  enum class Kind { Indep, Jet, Param, Aux };

  Kind kind = Kind::Indep;
  int ordinal = 0;   // independent ordinal (Indep) or dependent ordinal (Jet)
  MultiIndex index;  // Jet only
  std::string name;  // Param and Aux only

  static VarRef indep(int i) { return {Kind::Indep, i, {}, {}}; }
  static VarRef jet(int dep, MultiIndex idx = {}) { return {Kind::Jet, dep, std::move(idx), {}}; }
  static VarRef param(std::string n) { return {Kind::Param, 0, {}, std::move(n)}; }
  static VarRef aux(std::string n) { return {Kind::Aux, 0, {}, std::move(n)}; }

  bool is_jet() const { return kind == Kind::Jet; }
  int jet_order() const { return kind == Kind::Jet ? index.order() : 0; }

  auto operator<=>(const VarRef&) const = default;
  bool operator==(const VarRef&) const = default;
};

/// Display names for independent and dependent ordinals.
struct Naming {
  std::vector<std::string> indep;
  std::vector<std::string> dep;

  std::string indep_name(int i) const {
    if (i >= 0 && i < static_cast<int>(indep.size())) return indep[i];
    return "x" + std::to_string(i + 1);
  }
  std::string dep_name(int b) const {
    if (b >= 0 && b < static_cast<int>(dep.size())) return dep[b];
    return "u" + std::to_string(b + 1);
  }

  std::string to_string(const VarRef& v) const {
    switch (v.kind) {
      case VarRef::Kind::Indep:
        return indep_name(v.ordinal);
      case VarRef::Kind::Jet: {
        if (v.index.order() == 0) return dep_name(v.ordinal);
        std::string s = "d(" + dep_name(v.ordinal);
        for (int i : v.index.indices()) s += "," + indep_name(i);
        return s + ")";
      }
      case VarRef::Kind::Param:
      case VarRef::Kind::Aux:
        return v.name;
    }
    return "?";
  }
};

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Func };
enum class Fn { Sin, Cos, Exp, Sqrt };

inline const char* fn_name(Fn f) {
  switch (f) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Exp: return "exp";
    case Fn::Sqrt: return "sqrt";
  }
  return "?";
}

struct ExprNode;

class Expr {
 public:
  Expr();
  Expr(double v);   // NOLINT(google-explicit-constructor)
  Expr(int v) : Expr(static_cast<double>(v)) {}  // NOLINT
  Expr(Complex v);  // NOLINT
  Expr(VarRef v);   // NOLINT

  Op op() const;
  const Complex& value() const;
  const VarRef& var() const;
  int exponent() const;
  Fn fn() const;
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_const() const { return op() == Op::Const; }
  bool is_const(Complex c) const { return is_const() && value() == c; }

  static Expr make_neg(Expr a);
  static Expr make_add(Expr a, Expr b);
  static Expr make_sub(Expr a, Expr b);
  static Expr make_mul(Expr a, Expr b);
  static Expr make_div(Expr a, Expr b);
  static Expr make_pow(Expr base, int exponent);
  static Expr make_func(Fn f, Expr arg);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  static Expr node(ExprNode n);

  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  Op op = Op::Const;
  Complex value{};
  VarRef var{};
  int exponent = 0;
  Fn fn = Fn::Sin;
  Expr a;
  Expr b;
};

namespace detail {
inline const std::shared_ptr<const ExprNode>& zero_node() {
  static const auto z = std::make_shared<const ExprNode>(ExprNode{Op::Const, Complex{}, {}, 0, Fn::Sin, {}, {}});
  return z;
}
}  // namespace detail

inline Expr::Expr() : node_(nullptr) {}
inline Expr::Expr(double v) : Expr(Complex(v, 0.0)) {}
inline Expr::Expr(Complex v) : node_(std::make_shared<const ExprNode>(ExprNode{Op::Const, v, {}, 0, Fn::Sin, {}, {}})) {}
inline Expr::Expr(VarRef v)
    : node_(std::make_shared<const ExprNode>(ExprNode{Op::Var, {}, std::move(v), 0, Fn::Sin, {}, {}})) {}

// A null node pointer is the constant zero; it keeps default-constructed
// child slots free of allocations.
inline Op Expr::op() const { return node_ ? node_->op : Op::Const; }
inline const Complex& Expr::value() const { return (node_ ? node_ : detail::zero_node())->value; }
inline const VarRef& Expr::var() const { return (node_ ? node_ : detail::zero_node())->var; }
inline int Expr::exponent() const { return node_ ? node_->exponent : 0; }
inline Fn Expr::fn() const { return node_ ? node_->fn : Fn::Sin; }
inline const Expr& Expr::lhs() const { return (node_ ? node_ : detail::zero_node())->a; }
inline const Expr& Expr::rhs() const { return (node_ ? node_ : detail::zero_node())->b; }

inline Expr Expr::node(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

inline Complex int_power(Complex base, int n) {
  Complex result(1.0, 0.0);
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

inline Complex apply_fn(Fn f, Complex z) {
  switch (f) {
    case Fn::Sin: return std::sin(z);
    case Fn::Cos: return std::cos(z);
    case Fn::Exp: return std::exp(z);
    case Fn::Sqrt: return std::sqrt(z);
  }
  throw PreconditionError("unsupported function");
}

// Constructors fold constants (and the identities 0+e, 1*e, 0*e, e^0, e^1)
// but perform no other rewriting.
inline Expr Expr::make_neg(Expr a) {
  if (a.is_const()) return Expr(-a.value());
  return node({Op::Neg, {}, {}, 0, Fn::Sin, std::move(a), {}});
}

inline Expr Expr::make_add(Expr a, Expr b) {
  if (a.is_const() && b.is_const()) return Expr(a.value() + b.value());
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  return node({Op::Add, {}, {}, 0, Fn::Sin, std::move(a), std::move(b)});
}

inline Expr Expr::make_sub(Expr a, Expr b) {
  if (a.is_const() && b.is_const()) return Expr(a.value() - b.value());
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return make_neg(std::move(b));
  return node({Op::Sub, {}, {}, 0, Fn::Sin, std::move(a), std::move(b)});
}

inline Expr Expr::make_mul(Expr a, Expr b) {
  if (a.is_const() && b.is_const()) return Expr(a.value() * b.value());
  if (a.is_const(0.0) || b.is_const(0.0)) return Expr(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  return node({Op::Mul, {}, {}, 0, Fn::Sin, std::move(a), std::move(b)});
}

inline Expr Expr::make_div(Expr a, Expr b) {
  if (b.is_const(0.0)) return node({Op::Div, {}, {}, 0, Fn::Sin, std::move(a), std::move(b)});
  if (a.is_const() && b.is_const()) return Expr(a.value() / b.value());
  if (b.is_const(1.0)) return a;
  if (a.is_const(0.0)) return Expr(0.0);
  return node({Op::Div, {}, {}, 0, Fn::Sin, std::move(a), std::move(b)});
}

inline Expr Expr::make_pow(Expr base, int exponent) {
  if (exponent < 0) throw PreconditionError("negative integer exponent " + std::to_string(exponent));
  if (exponent == 0) return Expr(1.0);
  if (exponent == 1) return base;
  if (base.is_const()) return Expr(int_power(base.value(), exponent));
  return node({Op::Pow, {}, {}, exponent, Fn::Sin, std::move(base), {}});
}

inline Expr Expr::make_func(Fn f, Expr arg) {
  if (arg.is_const()) return Expr(apply_fn(f, arg.value()));
  return node({Op::Func, {}, {}, 0, f, std::move(arg), {}});
}

inline Expr operator-(Expr a) { return Expr::make_neg(std::move(a)); }
inline Expr operator+(Expr a, Expr b) { return Expr::make_add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::make_sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::make_mul(std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::make_div(std::move(a), std::move(b)); }
inline Expr pow(Expr base, int n) { return Expr::make_pow(std::move(base), n); }
inline Expr sin(Expr a) { return Expr::make_func(Fn::Sin, std::move(a)); }
inline Expr cos(Expr a) { return Expr::make_func(Fn::Cos, std::move(a)); }
inline Expr exp(Expr a) { return Expr::make_func(Fn::Exp, std::move(a)); }
inline Expr sqrt(Expr a) { return Expr::make_func(Fn::Sqrt, std::move(a)); }

/// Total structural order; 0 means the trees are identical.
inline int compare(const Expr& a, const Expr& b) {
  if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
  switch (a.op()) {
    case Op::Const: {
      const auto& x = a.value();
      const auto& y = b.value();
      if (x.real() != y.real()) return x.real() < y.real() ? -1 : 1;
      if (x.imag() != y.imag()) return x.imag() < y.imag() ? -1 : 1;
      return 0;
    }
    case Op::Var: {
      auto c = a.var() <=> b.var();
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Op::Neg:
      return compare(a.lhs(), b.lhs());
    case Op::Pow:
      if (a.exponent() != b.exponent()) return a.exponent() < b.exponent() ? -1 : 1;
      return compare(a.lhs(), b.lhs());
    case Op::Func:
      if (a.fn() != b.fn()) return a.fn() < b.fn() ? -1 : 1;
      return compare(a.lhs(), b.lhs());
    default: {
      int c = compare(a.lhs(), b.lhs());
      return c != 0 ? c : compare(a.rhs(), b.rhs());
    }
  }
}

inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

using Env = std::map<VarRef, Complex>;
using Substitution = std::map<VarRef, Expr>;

inline void collect_vars(const Expr& e, std::set<VarRef>& out) {
  switch (e.op()) {
    case Op::Const: return;
    case Op::Var: out.insert(e.var()); return;
    case Op::Neg:
    case Op::Pow:
    case Op::Func: collect_vars(e.lhs(), out); return;
    default:
      collect_vars(e.lhs(), out);
      collect_vars(e.rhs(), out);
  }
}

inline std::set<VarRef> free_vars(const Expr& e) {
  std::set<VarRef> out;
  collect_vars(e, out);
  return out;
}

inline bool depends_on(const Expr& e, const VarRef& v) { return free_vars(e).count(v) > 0; }

/// Formal partial derivative; every distinct VarRef is an independent symbol.
inline Expr diff(const Expr& e, const VarRef& v) {
  switch (e.op()) {
    case Op::Const: return Expr(0.0);
    case Op::Var: return Expr(e.var() == v ? 1.0 : 0.0);
    case Op::Neg: return -diff(e.lhs(), v);
    case Op::Add: return diff(e.lhs(), v) + diff(e.rhs(), v);
    case Op::Sub: return diff(e.lhs(), v) - diff(e.rhs(), v);
    case Op::Mul: return diff(e.lhs(), v) * e.rhs() + e.lhs() * diff(e.rhs(), v);
    case Op::Div: {
      Expr da = diff(e.lhs(), v);
      Expr db = diff(e.rhs(), v);
      return da / e.rhs() - e.lhs() * db / pow(e.rhs(), 2);
    }
    case Op::Pow: {
      Expr db = diff(e.lhs(), v);
      return Expr(static_cast<double>(e.exponent())) * pow(e.lhs(), e.exponent() - 1) * db;
    }
    case Op::Func: {
      Expr da = diff(e.lhs(), v);
      switch (e.fn()) {
        case Fn::Sin: return cos(e.lhs()) * da;
        case Fn::Cos: return -(sin(e.lhs()) * da);
        case Fn::Exp: return exp(e.lhs()) * da;
        case Fn::Sqrt: return da / (Expr(2.0) * sqrt(e.lhs()));
      }
      throw PreconditionError(std::string("no derivative rule for function '") + fn_name(e.fn()) + "'");
    }
  }
  return Expr(0.0);
}

namespace detail {
inline Complex eval_rec(const Expr& e, const Env& env) {
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Var: return env.at(e.var());
    case Op::Neg: return -eval_rec(e.lhs(), env);
    case Op::Add: return eval_rec(e.lhs(), env) + eval_rec(e.rhs(), env);
    case Op::Sub: return eval_rec(e.lhs(), env) - eval_rec(e.rhs(), env);
    case Op::Mul: return eval_rec(e.lhs(), env) * eval_rec(e.rhs(), env);
    case Op::Div: {
      Complex num = eval_rec(e.lhs(), env);
      Complex den = eval_rec(e.rhs(), env);
      if (den == Complex(0.0, 0.0)) throw NumericError("division by zero during evaluation");
      return num / den;
    }
    case Op::Pow: return int_power(eval_rec(e.lhs(), env), e.exponent());
    case Op::Func: return apply_fn(e.fn(), eval_rec(e.lhs(), env));
  }
  return {};
}
}  // namespace detail

/// Numeric value of e; every free symbol must be bound in env.
inline Complex eval(const Expr& e, const Env& env, const Naming& names = {}) {
  std::vector<std::string> missing;
  for (const auto& v : free_vars(e))
    if (!env.count(v)) missing.push_back(names.to_string(v));
  if (!missing.empty()) {
    std::string msg = "unbound variables:";
    for (const auto& m : missing) msg += " " + m;
    throw UnboundError(msg, missing);
  }
  return detail::eval_rec(e, env);
}

/// Simultaneous substitution; the result is rebuilt through the folding
/// constructors only.
inline Expr substitute(const Expr& e, const Substitution& map) {
  if (map.empty()) return e;
  switch (e.op()) {
    case Op::Const: return e;
    case Op::Var: {
      auto it = map.find(e.var());
      return it == map.end() ? e : it->second;
    }
    case Op::Neg: return -substitute(e.lhs(), map);
    case Op::Add: return substitute(e.lhs(), map) + substitute(e.rhs(), map);
    case Op::Sub: return substitute(e.lhs(), map) - substitute(e.rhs(), map);
    case Op::Mul: return substitute(e.lhs(), map) * substitute(e.rhs(), map);
    case Op::Div: return substitute(e.lhs(), map) / substitute(e.rhs(), map);
    case Op::Pow: return pow(substitute(e.lhs(), map), e.exponent());
    case Op::Func: return Expr::make_func(e.fn(), substitute(e.lhs(), map));
  }
  return e;
}

/// Substitution of numeric bindings.
inline Expr bind(const Expr& e, const Env& env) {
  Substitution map;
  for (const auto& [v, c] : env) map.emplace(v, Expr(c));
  return substitute(e, map);
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {
inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: {
      const auto& c = e.value();
      if (c.imag() == 0.0) return c.real() < 0.0 || std::signbit(c.real()) ? 3 : 5;
      return 5;
    }
    default: return 5;
  }
}

inline std::string const_string(const Complex& c) {
  if (c.imag() == 0.0) return format_double(c.real());
  if (c.real() == 0.0) {
    if (c.imag() == 1.0) return "im";
    return "(" + format_double(c.imag()) + "*im)";
  }
  std::string s = "(" + format_double(c.real());
  if (c.imag() < 0.0)
    s += " - " + format_double(-c.imag());
  else
    s += " + " + format_double(c.imag());
  return s + "*im)";
}

inline std::string print_rec(const Expr& e, const Naming& names, int min_prec) {
  std::string s;
  int prec = precedence(e);
  switch (e.op()) {
    case Op::Const: s = const_string(e.value()); break;
    case Op::Var: s = names.to_string(e.var()); break;
    case Op::Neg: s = "-" + print_rec(e.lhs(), names, 3); break;
    case Op::Add: s = print_rec(e.lhs(), names, 1) + " + " + print_rec(e.rhs(), names, 2); break;
    case Op::Sub: s = print_rec(e.lhs(), names, 1) + " - " + print_rec(e.rhs(), names, 2); break;
    case Op::Mul: s = print_rec(e.lhs(), names, 2) + "*" + print_rec(e.rhs(), names, 3); break;
    case Op::Div: s = print_rec(e.lhs(), names, 2) + "/" + print_rec(e.rhs(), names, 3); break;
    case Op::Pow: s = print_rec(e.lhs(), names, 5) + "^" + std::to_string(e.exponent()); break;
    case Op::Func: s = std::string(fn_name(e.fn())) + "(" + print_rec(e.lhs(), names, 0) + ")"; break;
  }
  return prec < min_prec ? "(" + s + ")" : s;
}
}  // namespace detail

/// Text form in the DSL's expression syntax; parsing it back yields the
/// same tree.
inline std::string to_string(const Expr& e, const Naming& names = {}) { return detail::print_rec(e, names, 0); }

}  // namespace charkit
