#pragma once

// Principal symbol of a PDE system and everything computed from it: the
// matrix A(p) = sum over sorted |I| = k of p^I dF/du_I, its determinant, its
// generic and pointwise ranks, characteristic surfaces and the first-order
// wave-front equation.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "charkit/error.hpp"
#include "charkit/expr.hpp"
#include "charkit/linalg.hpp"
#include "charkit/parser.hpp"
#include "charkit/poly.hpp"

namespace charkit {

using ExprMatrix = std::vector<std::vector<Expr>>;

inline ExprMatrix zero_matrix(int rows, int cols) { return ExprMatrix(rows, std::vector<Expr>(cols, Expr(0.0))); }

/// Highest-order coefficients: entries[I][a][b] = dF^a / du^b_I for every
/// sorted multi-index I of order k. Absent indices are zero matrices.
struct SymbolTensor {
  int n = 0;          // independent variables
  int m = 0;          // unknowns
  int equations = 0;  // rows of every matrix
  int k = 0;          // order
  Naming names;
  std::map<MultiIndex, ExprMatrix> entries;

  bool determined() const { return equations == m; }

  std::string index_string(const MultiIndex& idx) const {
    std::string s;
    for (int i : idx.indices()) s += names.indep_name(i);
    return s;
  }

  /// Multiplicity factor (N_1! ... N_n!)/k! relating an ordered-sum entry to
  /// the component of the symmetric coefficient tensor.
  static double tensor_factor(const MultiIndex& idx) {
    double num = 1.0;
    std::map<int, int> counts;
    for (int i : idx.indices()) ++counts[i];
    for (const auto& [i, c] : counts) num *= std::tgamma(c + 1.0);
    return num / std::tgamma(idx.order() + 1.0);
  }

  /// Covector component symbols p_<name>.
  std::vector<VarRef> covector_vars() const {
    std::vector<VarRef> out;
    for (int i = 0; i < n; ++i) out.push_back(VarRef::aux("p_" + names.indep_name(i)));
    return out;
  }
};

inline SymbolTensor principal_symbol(const PDESystem& sys) {
  if (sys.order < 1) throw PreconditionError("principal symbol needs order k >= 1");
  SymbolTensor st;
  st.n = sys.n();
  st.m = sys.m();
  st.equations = sys.equation_count();
  st.k = sys.order;
  st.names = sys.names;
  for (int a = 0; a < st.equations; ++a) {
    for (const auto& v : free_vars(sys.equations[a])) {
      if (!v.is_jet() || v.index.order() != st.k) continue;
      Expr d = diff(sys.equations[a], v);
      if (d.is_const(0.0)) continue;
      auto [it, inserted] = st.entries.try_emplace(v.index, zero_matrix(st.equations, st.m));
      it->second[a][v.ordinal] = d;
    }
  }
  return st;
}

/// Symbol entries evaluated at a point of jet space.
class NumericSymbol {
 public:
  NumericSymbol(const SymbolTensor& st, const Env& env) : n_(st.n), rows_(st.equations), cols_(st.m) {
    for (const auto& [idx, mat] : st.entries) {
      Matrix num(rows_, cols_);
      for (int a = 0; a < rows_; ++a)
        for (int b = 0; b < cols_; ++b) num(a, b) = eval(mat[a][b], env, st.names);
      terms_.emplace_back(idx, std::move(num));
    }
  }

  int n() const { return n_; }

  /// A(p) = sum_I p^I entries(I).
  Matrix at(const std::vector<Complex>& p) const {
    if (static_cast<int>(p.size()) != n_) throw PreconditionError("covector has wrong dimension");
    Matrix out(rows_, cols_);
    for (const auto& [idx, mat] : terms_) {
      Complex w(1.0, 0.0);
      for (int i : idx.indices()) w *= p[i];
      if (w == Complex{}) continue;
      out += w * mat;
    }
    return out;
  }

 private:
  int n_, rows_, cols_;
  std::vector<std::pair<MultiIndex, Matrix>> terms_;
};

inline Matrix symbol_matrix(const SymbolTensor& st, const Env& env, const std::vector<Complex>& p) {
  return NumericSymbol(st, env).at(p);
}

namespace detail {
inline std::vector<std::vector<Poly>> symbol_polys(const SymbolTensor& st, const Substitution& cov,
                                                   const Env* env, AtomTable& table) {
  std::vector<std::vector<Poly>> m(st.equations, std::vector<Poly>(st.m));
  for (const auto& [idx, mat] : st.entries) {
    Expr mono(1.0);
    for (int i : idx.indices()) mono = mono * cov.at(VarRef::indep(i));
    Poly pm = expand(mono, table);
    for (int a = 0; a < st.equations; ++a)
      for (int b = 0; b < st.m; ++b) {
        Expr e = env ? charkit::bind(mat[a][b], *env) : mat[a][b];
        if (e.is_const(0.0)) continue;
        m[a][b] += pm * expand(e, table);
      }
  }
  return m;
}
}  // namespace detail

/// det A(p) expanded in the covector symbols p_<name>; homogeneous of degree
/// m*k. Coefficients may still involve jets or parameters left unbound.
inline PolyForm char_det(const SymbolTensor& st, const Env* env = nullptr) {
  if (!st.determined())
    throw PreconditionError("characteristic determinant needs a determined system (" +
                            std::to_string(st.equations) + " equations, " + std::to_string(st.m) + " unknowns)");
  auto vars = st.covector_vars();
  Substitution cov;
  for (int i = 0; i < st.n; ++i) cov.emplace(VarRef::indep(i), Expr(vars[i]));
  AtomTable table;
  auto m = detail::symbol_polys(st, cov, env, table);
  return to_polyform(determinant(m), table, vars, st.names);
}

inline PolyForm char_det(const SymbolTensor& st, const Env& env) { return char_det(st, &env); }

/// Maximum numeric rank of A(p) over `trials` seeded random real covectors
/// with components uniform on [-1, 1].
inline int generic_rank(const SymbolTensor& st, const Env& env, std::uint64_t seed = 0, int trials = 16) {
  if (trials < 1) throw PreconditionError("generic_rank needs at least one trial");
  NumericSymbol ns(st, env);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int best = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<Complex> p(st.n);
    for (auto& c : p) c = unit(rng);
    best = std::max(best, numeric_rank(ns.at(p)));
  }
  return best;
}

inline void require_nonzero(const std::vector<Complex>& p) {
  for (const auto& c : p)
    if (c != Complex{}) return;
  throw PreconditionError("zero covector");
}

/// A covector is characteristic when the symbol drops below the generic rank.
inline bool is_char_covector(const SymbolTensor& st, const Env& env, const std::vector<Complex>& p, int r) {
  require_nonzero(p);
  return numeric_rank(symbol_matrix(st, env, p)) < r;
}

/// Null space of the order-k symbol map v -> sum_I entries(I) v_I, acting on
/// one m-vector per sorted multi-index of order k (blocks in lexicographic
/// index order). Rows form an orthonormal basis.
inline Matrix symbol_kernel(const SymbolTensor& st, const Env& env) {
  auto indices = sorted_indices(st.n, st.k);
  Matrix big(st.equations, st.m * static_cast<int>(indices.size()));
  for (std::size_t blk = 0; blk < indices.size(); ++blk) {
    auto it = st.entries.find(indices[blk]);
    if (it == st.entries.end()) continue;
    for (int a = 0; a < st.equations; ++a)
      for (int b = 0; b < st.m; ++b)
        big(a, static_cast<int>(blk) * st.m + b) = eval(it->second[a][b], env, st.names);
  }
  return null_space(big);
}

struct SurfaceSample {
  std::vector<Complex> covector;  // dz at the sample
  double surface_residual = 0.0;  // |z| at the sample
  int generic_rank = 0;           // r at this jet point
  int rank = 0;                   // rank A(dz)
  int defect = 0;                 // q = r - rank
  bool characteristic = false;
  Matrix constraints;  // left null space of A(dz): compatibility rows on data
};

struct SurfaceReport {
  std::vector<SurfaceSample> samples;
  std::string note =
      "the verdict depends on the jet data supplied at each sample, not only on the surface";
};

/// Classifies z = 0 as characteristic or not at each sample of jet data.
inline SurfaceReport check_surface(const SymbolTensor& st, const Expr& z, const std::vector<Env>& samples,
                                   std::uint64_t seed = 0, int trials = 16) {
  SurfaceReport report;
  for (const auto& env : samples) {
    SurfaceSample s;
    s.surface_residual = std::abs(eval(z, env, st.names));
    double norm = 0.0;
    for (int i = 0; i < st.n; ++i) {
      s.covector.push_back(eval(diff(z, VarRef::indep(i)), env, st.names));
      norm = std::max(norm, std::abs(s.covector.back()));
    }
    if (norm <= 1e-14) throw PreconditionError("surface gradient vanishes at a sample");
    NumericSymbol ns(st, env);
    Matrix a = ns.at(s.covector);
    s.generic_rank = generic_rank(st, env, seed, trials);
    s.rank = numeric_rank(a);
    s.defect = std::max(0, s.generic_rank - s.rank);
    s.characteristic = s.rank < s.generic_rank;
    s.constraints = left_null_space(a);
    report.samples.push_back(std::move(s));
  }
  return report;
}

/// First-order equation for characteristic hypersurfaces t = tau(y), where t
/// is the coordinate `time` and y are the remaining ones: det A(dt - tau_a dy^a).
struct WavefrontPde {
  Expr expr;                  // in the slope symbols tau_<name>
  int time = 0;               // ordinal of the solved-for coordinate
  std::vector<VarRef> slopes; // tau_<name> for each remaining coordinate
  Naming names;               // names of the original system

  /// The same equation on first jets of tau over the remaining coordinates:
  /// slopes become u_a, the time coordinate becomes the unknown u.
  Expr as_first_order() const {
    Substitution map;
    int n = static_cast<int>(slopes.size()) + 1;
    int a = 0;
    for (int i = 0; i < n; ++i) {
      if (i == time) {
        map.emplace(VarRef::indep(i), Expr(VarRef::jet(0)));
        continue;
      }
      map.emplace(slopes[a], Expr(VarRef::jet(0, MultiIndex{a})));
      map.emplace(VarRef::indep(i), Expr(VarRef::indep(a)));
      ++a;
    }
    return substitute(expr, map);
  }

  Naming first_order_names() const {
    Naming out;
    out.dep = {"tau"};
    for (int i = 0; i <= static_cast<int>(slopes.size()); ++i)
      if (i != time) out.indep.push_back(names.indep_name(i));
    return out;
  }
};

inline WavefrontPde char_surface_pde(const SymbolTensor& st, const Env& background, std::optional<int> time = {}) {
  if (!st.determined()) throw PreconditionError("wave-front equation needs a determined system");
  int t = time.value_or(st.n - 1);
  if (t < 0 || t >= st.n) throw PreconditionError("time coordinate out of range");
  WavefrontPde out;
  out.time = t;
  out.names = st.names;
  Substitution cov;
  for (int i = 0; i < st.n; ++i) {
    if (i == t) {
      cov.emplace(VarRef::indep(i), Expr(1.0));
      continue;
    }
    VarRef tau = VarRef::aux("tau_" + st.names.indep_name(i));
    out.slopes.push_back(tau);
    cov.emplace(VarRef::indep(i), -Expr(tau));
  }
  for (const auto& [idx, mat] : st.entries)
    for (const auto& row : mat)
      for (const auto& e : row)
        for (const auto& v : free_vars(charkit::bind(e, background)))
          if (v.is_jet()) throw PreconditionError("symbol not background-reducible: depends on " + st.names.to_string(v));
  AtomTable table;
  auto m = detail::symbol_polys(st, cov, &background, table);
  out.expr = to_expr(determinant(m), table);
  return out;
}

}  // namespace charkit
