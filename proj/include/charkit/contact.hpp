#pragma once

// Contact geometry of first jets J^1 of a scalar function: coordinates x^i,
// u, u_i; contact form du - u_i dx^i; the contact field X_f of a generating
// function, the characteristic field Y_F and the Jacobi bracket.

#include <string>
#include <vector>

#include "charkit/error.hpp"
#include "charkit/expr.hpp"

namespace charkit {

/// Coordinates on J^1 of a scalar function of n variables.
namespace jet1 {
inline VarRef x(int i) { return VarRef::indep(i); }
inline VarRef u() { return VarRef::jet(0); }
inline VarRef p(int i) { return VarRef::jet(0, MultiIndex{i}); }

inline Naming naming(int n, std::string dep = "u") {
  Naming names;
  for (int i = 0; i < n; ++i) names.indep.push_back("x" + std::to_string(i + 1));
  names.dep = {std::move(dep)};
  return names;
}

/// Throws unless e lives on J^1 (plus parameters).
inline void require(const Expr& e, int n, const char* what = "expression") {
  for (const auto& v : free_vars(e)) {
    switch (v.kind) {
      case VarRef::Kind::Param: continue;
      case VarRef::Kind::Indep:
        if (v.ordinal < n) continue;
        break;
      case VarRef::Kind::Jet:
        if (v.ordinal == 0 && v.index.order() <= 1 && (v.index.order() == 0 || v.index.indices()[0] < n)) continue;
        break;
      case VarRef::Kind::Aux: break;
    }
    throw PreconditionError(std::string(what) + " must depend on first-jet coordinates only; found " +
                            naming(n).to_string(v));
  }
}
}  // namespace jet1

/// Vector field on J^1 with components ordered (dx^1..dx^n, du_1..du_n, du).
struct VectorField {
  int n = 0;
  std::vector<Expr> comps;

  VectorField() = default;
  explicit VectorField(int dim) : n(dim), comps(2 * dim + 1, Expr(0.0)) {}

  Expr& dx(int i) { return comps[i]; }
  Expr& dp(int i) { return comps[n + i]; }
  Expr& du() { return comps[2 * n]; }
  const Expr& dx(int i) const { return comps[i]; }
  const Expr& dp(int i) const { return comps[n + i]; }
  const Expr& du() const { return comps[2 * n]; }

  /// Coordinate attached to component c.
  VarRef coordinate(int c) const {
    if (c < n) return jet1::x(c);
    if (c < 2 * n) return jet1::p(c - n);
    return jet1::u();
  }

  /// Directional derivative V(g).
  Expr apply(const Expr& g) const {
    Expr out(0.0);
    for (int c = 0; c < static_cast<int>(comps.size()); ++c) {
      if (comps[c].is_const(0.0)) continue;
      out = out + comps[c] * diff(g, coordinate(c));
    }
    return out;
  }
};

/// Lie bracket [V, W] = V(W^c) - W(V^c) componentwise.
inline VectorField commutator(const VectorField& v, const VectorField& w) {
  VectorField out(v.n);
  for (int c = 0; c < static_cast<int>(out.comps.size()); ++c) out.comps[c] = v.apply(w.comps[c]) - w.apply(v.comps[c]);
  return out;
}

/// alpha(V) for the contact form alpha = du - u_i dx^i.
inline Expr contact_pairing(const VectorField& v) {
  Expr out = v.du();
  for (int i = 0; i < v.n; ++i) out = out - Expr(jet1::p(i)) * v.dx(i);
  return out;
}

/// Infinitesimal contactomorphism generated by f:
/// dx^i = f_{u_i}, du_i = -(f_{x^i} + u_i f_u), du = u_i f_{u_i} - f.
inline VectorField contact_field(const Expr& f, int n) {
  jet1::require(f, n, "generating function");
  VectorField out(n);
  Expr fu = diff(f, jet1::u());
  Expr du(0.0);
  for (int i = 0; i < n; ++i) {
    Expr fp = diff(f, jet1::p(i));
    out.dx(i) = fp;
    out.dp(i) = -(diff(f, jet1::x(i)) + Expr(jet1::p(i)) * fu);
    du = du + Expr(jet1::p(i)) * fp;
  }
  out.du() = du - f;
  return out;
}

/// Characteristic field Y_F = X_F + F d/du, spanning the characteristic
/// direction of F = 0:
/// dx^i = F_{u_i}, du_i = -F_{x^i} - u_i F_u, du = u_i F_{u_i}.
inline VectorField char_field(const Expr& f, int n) {
  VectorField out = contact_field(f, n);
  out.du() = out.du() + f;
  return out;
}

/// Jacobi bracket {f,g} = X_f(g) - X_1(f) g in coordinates.
inline Expr jacobi_bracket(const Expr& f, const Expr& g, int n) {
  jet1::require(f, n, "bracket argument");
  jet1::require(g, n, "bracket argument");
  Expr fu = diff(f, jet1::u());
  Expr gu = diff(g, jet1::u());
  Expr out(0.0);
  for (int i = 0; i < n; ++i) {
    Expr fp = diff(f, jet1::p(i));
    Expr gp = diff(g, jet1::p(i));
    out = out + fp * diff(g, jet1::x(i)) - gp * diff(f, jet1::x(i)) + Expr(jet1::p(i)) * (fp * gu - gp * fu);
  }
  return out - f * gu + g * fu;
}

}  // namespace charkit
