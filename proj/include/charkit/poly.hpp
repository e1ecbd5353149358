#pragma once

// Expanded polynomial normal form. Expressions are expanded over "atoms":
// variables plus opaque subterms (function applications and reciprocals of
// non-constant denominators), with complex coefficients.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "charkit/expr.hpp"

namespace charkit {

/// Interns atoms; monomials refer to atoms by id.
class AtomTable {
 public:
  int intern(const Expr& atom) {
    auto [it, inserted] = ids_.emplace(atom, static_cast<int>(atoms_.size()));
    if (inserted) atoms_.push_back(atom);
    return it->second;
  }
  const Expr& atom(int id) const { return atoms_.at(id); }
  int size() const { return static_cast<int>(atoms_.size()); }

 private:
  std::map<Expr, int, ExprLess> ids_;
  std::vector<Expr> atoms_;
};

/// Sorted (atom id, exponent) pairs with positive exponents.
using Monomial = std::vector<std::pair<int, int>>;

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

class Poly {
 public:
  using Terms = std::map<Monomial, Complex>;

  Poly() = default;
  static Poly constant(Complex c) {
    Poly p;
    if (c != Complex{}) p.terms_.emplace(Monomial{}, c);
    return p;
  }
  static Poly atom(int id) {
    Poly p;
    p.terms_.emplace(Monomial{{id, 1}}, Complex(1.0, 0.0));
    return p;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
  Complex constant_value() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Complex{} : it->second;
  }

  void add_term(const Monomial& m, Complex c) {
    if (c == Complex{}) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Complex{}) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(const Poly& a) {
    Poly out;
    for (const auto& [m, c] : a.terms_) out.terms_.emplace(m, -c);
    return out;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(mono_mul(ma, mb), ca * cb);
    return out;
  }
  Poly scaled(Complex s) const {
    Poly out;
    for (const auto& [m, c] : terms_) out.add_term(m, c * s);
    return out;
  }
  Poly pow(int n) const {
    Poly result = constant(1.0);
    Poly base = *this;
    while (n > 0) {
      if (n & 1) result = result * base;
      n >>= 1;
      if (n > 0) base = base * base;
    }
    return result;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

 private:
  Terms terms_;
};

Expr to_expr(const Poly& p, const AtomTable& table);

/// Expands e into a Poly over atoms interned in table.
inline Poly expand(const Expr& e, AtomTable& table) {
  switch (e.op()) {
    case Op::Const: return Poly::constant(e.value());
    case Op::Var: return Poly::atom(table.intern(e));
    case Op::Neg: return -expand(e.lhs(), table);
    case Op::Add: return expand(e.lhs(), table) + expand(e.rhs(), table);
    case Op::Sub: return expand(e.lhs(), table) - expand(e.rhs(), table);
    case Op::Mul: return expand(e.lhs(), table) * expand(e.rhs(), table);
    case Op::Div: {
      Poly num = expand(e.lhs(), table);
      Poly den = expand(e.rhs(), table);
      if (den.is_constant() && den.constant_value() != Complex{}) return num.scaled(1.0 / den.constant_value());
      Expr recip = Expr::make_div(Expr(1.0), to_expr(den, table));
      return num * Poly::atom(table.intern(recip));
    }
    case Op::Pow: return expand(e.lhs(), table).pow(e.exponent());
    case Op::Func: {
      Poly arg = expand(e.lhs(), table);
      if (arg.is_constant()) return Poly::constant(apply_fn(e.fn(), arg.constant_value()));
      return Poly::atom(table.intern(Expr::make_func(e.fn(), to_expr(arg, table))));
    }
  }
  return {};
}

namespace detail {
// Monomials of a Poly ordered by the structural order of their atoms, so the
// rebuilt expression does not depend on interning order.
inline std::vector<std::pair<std::vector<std::pair<Expr, int>>, Complex>> canonical_terms(const Poly& p,
                                                                                          const AtomTable& table) {
  std::vector<std::pair<std::vector<std::pair<Expr, int>>, Complex>> out;
  for (const auto& [m, c] : p.terms()) {
    std::vector<std::pair<Expr, int>> factors;
    for (const auto& [id, k] : m) factors.emplace_back(table.atom(id), k);
    std::sort(factors.begin(), factors.end(),
              [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
    out.emplace_back(std::move(factors), c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const auto& fa = a.first;
    const auto& fb = b.first;
    int da = 0, db = 0;
    for (const auto& f : fa) da += f.second;
    for (const auto& f : fb) db += f.second;
    if (da != db) return da > db;
    for (std::size_t i = 0; i < std::min(fa.size(), fb.size()); ++i) {
      int c = compare(fa[i].first, fb[i].first);
      if (c != 0) return c < 0;
      if (fa[i].second != fb[i].second) return fa[i].second > fb[i].second;
    }
    return fa.size() < fb.size();
  });
  return out;
}
}  // namespace detail

inline Expr to_expr(const Poly& p, const AtomTable& table) {
  Expr sum(0.0);
  bool first = true;
  for (const auto& [factors, c] : detail::canonical_terms(p, table)) {
    Expr mono(1.0);
    for (const auto& [atom, k] : factors) mono = mono * pow(atom, k);
    bool negative = c.imag() == 0.0 && c.real() < 0.0;
    Complex mag = negative ? -c : c;
    Expr term = mag == Complex(1.0, 0.0) ? mono : Expr(mag) * mono;
    if (first) {
      sum = negative ? -term : term;
      first = false;
    } else {
      sum = negative ? sum - term : sum + term;
    }
  }
  return sum;
}

/// Expanded normal form of e over the listed variables. Coefficients are
/// expressions free of those variables.
struct PolyForm {
  struct Term {
    std::vector<int> exponents;
    Expr coefficient;
  };

  std::vector<VarRef> variables;
  std::vector<Term> terms;  // graded lexicographic, highest first

  int degree() const {
    int d = 0;
    for (const auto& t : terms) d = std::max(d, std::accumulate(t.exponents.begin(), t.exponents.end(), 0));
    return d;
  }

  /// Coefficient of the given exponent vector, zero if absent.
  Expr coefficient(const std::vector<int>& exponents) const {
    for (const auto& t : terms)
      if (t.exponents == exponents) return t.coefficient;
    return Expr(0.0);
  }

  bool is_homogeneous(int degree) const {
    for (const auto& t : terms)
      if (std::accumulate(t.exponents.begin(), t.exponents.end(), 0) != degree) return false;
    return true;
  }

  Expr to_expr() const {
    Expr sum(0.0);
    for (const auto& t : terms) {
      Expr mono(1.0);
      for (std::size_t i = 0; i < variables.size(); ++i) mono = mono * pow(Expr(variables[i]), t.exponents[i]);
      sum = sum + t.coefficient * mono;
    }
    return sum;
  }
};

struct GrlexGreater {
  bool operator()(const std::vector<int>& a, const std::vector<int>& b) const {
    int da = std::accumulate(a.begin(), a.end(), 0);
    int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da > db;
    return a > b;
  }
};

/// Groups an already-expanded Poly by powers of vars.
inline PolyForm to_polyform(const Poly& p, const AtomTable& table, const std::vector<VarRef>& vars,
                            const Naming& names = {}) {
  std::map<int, int> slot;  // atom id -> variable position
  for (int id = 0; id < table.size(); ++id) {
    const Expr& a = table.atom(id);
    if (a.op() == Op::Var) {
      auto it = std::find(vars.begin(), vars.end(), a.var());
      if (it != vars.end()) slot[id] = static_cast<int>(it - vars.begin());
      continue;
    }
    for (const auto& v : free_vars(a))
      if (std::find(vars.begin(), vars.end(), v) != vars.end())
        throw PreconditionError("non-polynomial dependence on " + names.to_string(v) + " in " +
                                to_string(a, names));
  }
  std::map<std::vector<int>, Poly, GrlexGreater> grouped;
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> exps(vars.size(), 0);
    Monomial rest;
    for (const auto& [id, k] : m) {
      auto it = slot.find(id);
      if (it != slot.end())
        exps[it->second] += k;
      else
        rest.emplace_back(id, k);
    }
    grouped[exps].add_term(rest, c);
  }
  PolyForm out;
  out.variables = vars;
  for (const auto& [exps, coeff] : grouped) {
    if (coeff.is_zero()) continue;
    out.terms.push_back({exps, to_expr(coeff, table)});
  }
  return out;
}

inline PolyForm poly_normalize(const Expr& e, const std::vector<VarRef>& vars, const Naming& names = {}) {
  AtomTable table;
  Poly p = expand(e, table);
  return to_polyform(p, table, vars, names);
}

/// Equality of expanded normal forms: the expansion of a - b must vanish up
/// to rel_tol relative to the largest coefficient of a or b.
inline bool poly_equal(const Expr& a, const Expr& b, double rel_tol = 1e-12) {
  AtomTable table;
  Poly pa = expand(a, table);
  Poly pb = expand(b, table);
  double scale = std::max({1.0, pa.max_abs_coefficient(), pb.max_abs_coefficient()});
  return (pa - pb).max_abs_coefficient() <= rel_tol * scale;
}

/// Symbolic determinant of a square matrix of polynomials, by expansion over
/// column subsets (one minor per subset).
inline Poly determinant(const std::vector<std::vector<Poly>>& m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return Poly::constant(1.0);
  if (n > 20) throw PreconditionError("symbolic determinant limited to 20x20");
  for (const auto& row : m)
    if (static_cast<int>(row.size()) != n) throw PreconditionError("determinant of a non-square matrix");
  std::map<std::uint32_t, Poly> minors{{0u, Poly::constant(1.0)}};
  for (int r = 0; r < n; ++r) {
    std::map<std::uint32_t, Poly> next;
    for (const auto& [mask, minor] : minors) {
      if (minor.is_zero()) continue;
      for (int c = 0; c < n; ++c) {
        if (mask & (1u << c) || m[r][c].is_zero()) continue;
        std::uint32_t above = mask & ~((2u << c) - 1u);
        int inversions = std::popcount(above);
        Poly term = m[r][c] * minor;
        if (inversions % 2) term = -term;
        next[mask | (1u << c)] += term;
      }
    }
    minors = std::move(next);
  }
  auto it = minors.find((1u << n) - 1u);
  return it == minors.end() ? Poly{} : it->second;
}

}  // namespace charkit
