#pragma once

// Built-in principal symbols: scalar wave operator, Dirac, Maxwell and the
// linearized Ricci operator on a constant background metric.

#include <functional>
#include <string>
#include <vector>

#include "charkit/linalg.hpp"
#include "charkit/symbol.hpp"

namespace charkit {

/// Minkowski metric diag(1, -1, ..., -1) in n dimensions.
inline Matrix minkowski(int n) {
  Matrix g(n, n);
  g(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) g(i, i) = -1.0;
  return g;
}

inline Naming spacetime_names(int n) {
  Naming names;
  static const char* spacetime[] = {"t", "x", "y", "z"};
  if (n >= 2 && n <= 4) {
    names.indep.assign(spacetime, spacetime + n);
  } else {
    for (int i = 0; i < n; ++i) names.indep.push_back("x" + std::to_string(i));
  }
  return names;
}

/// Checks symmetry and invertibility; returns the inverse metric.
inline Matrix inverse_metric(const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() < 1) throw PreconditionError("metric must be a non-empty square matrix");
  double scale = std::max(1.0, g.max_abs());
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(g(i, j) - g(j, i)) > 1e-12 * scale) throw PreconditionError("metric is not symmetric");
  try {
    return inverse(g);
  } catch (const PreconditionError&) {
    throw PreconditionError("metric is singular");
  }
}

/// Builds a constant-coefficient symbol from a numeric homogeneous quadratic
/// map p -> A(p). The ordered-sum entries are recovered by polarization:
/// E_ii = A(e_i), E_ij = A(e_i + e_j) - A(e_i) - A(e_j) for i < j.
inline SymbolTensor symbol_from_quadratic(int n, int rows, int cols, Naming names,
                                          const std::function<Matrix(const std::vector<Complex>&)>& a) {
  SymbolTensor st;
  st.n = n;
  st.m = cols;
  st.equations = rows;
  st.k = 2;
  st.names = std::move(names);
  auto unit = [n](int i, int j) {
    std::vector<Complex> p(n);
    p[i] += 1.0;
    p[j] += 1.0;
    return p;
  };
  std::vector<Matrix> diag;
  for (int i = 0; i < n; ++i) diag.push_back(Complex(0.25) * a(unit(i, i)));  // unit(i, i) = 2 e_i
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Matrix e = i == j ? diag[i] : a(unit(i, j)) - diag[i] - diag[j];
      if (e.max_abs() == 0.0) continue;
      ExprMatrix em = zero_matrix(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) em[r][c] = Expr(e(r, c));
      st.entries.emplace(MultiIndex{i, j}, std::move(em));
    }
  return st;
}

/// g^{ij} p_i p_j for the scalar wave (or Laplace) operator of metric g.
inline SymbolTensor wave_symbol(const Matrix& g) {
  Matrix ginv = inverse_metric(g);
  const int n = g.rows();
  Naming names = spacetime_names(n);
  names.dep = {"u"};
  return symbol_from_quadratic(n, 1, 1, names, [&](const std::vector<Complex>& p) {
    Matrix out(1, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(0, 0) += ginv(i, j) * p[i] * p[j];
    return out;
  });
}

/// Dirac gamma matrices in the standard (Dirac) representation, signature
/// (+,-,-,-).
inline std::vector<Matrix> dirac_gammas() {
  const Complex i(0.0, 1.0);
  Matrix g0{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}};
  Matrix g1{{0, 0, 0, 1}, {0, 0, 1, 0}, {0, -1, 0, 0}, {-1, 0, 0, 0}};
  Matrix g2{{0, 0, 0, -i}, {0, 0, i, 0}, {0, i, 0, 0}, {-i, 0, 0, 0}};
  Matrix g3{{0, 0, 1, 0}, {0, 0, 0, -1}, {-1, 0, 0, 0}, {0, 1, 0, 0}};
  return {g0, g1, g2, g3};
}

/// i gamma^mu: the first-order symbol of i gamma^mu d_mu - m.
inline SymbolTensor dirac_symbol() {
  SymbolTensor st;
  st.n = 4;
  st.m = 4;
  st.equations = 4;
  st.k = 1;
  st.names = spacetime_names(4);
  st.names.dep = {"psi0", "psi1", "psi2", "psi3"};
  const Complex i(0.0, 1.0);
  auto gammas = dirac_gammas();
  for (int mu = 0; mu < 4; ++mu) {
    ExprMatrix em = zero_matrix(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) em[r][c] = Expr(i * gammas[mu](r, c));
    st.entries.emplace(MultiIndex{mu}, std::move(em));
  }
  return st;
}

/// A(p)_j^l = g^{-1}(p,p) delta_j^l - p^l p_j for the potential u_l.
inline SymbolTensor maxwell_symbol(const Matrix& g) {
  Matrix ginv = inverse_metric(g);
  const int n = g.rows();
  Naming names = spacetime_names(n);
  for (int i = 0; i < n; ++i) names.dep.push_back("A" + std::to_string(i));
  return symbol_from_quadratic(n, n, n, names, [&](const std::vector<Complex>& p) {
    Complex pp{};
    std::vector<Complex> up(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        pp += ginv(i, j) * p[i] * p[j];
        up[i] += ginv(i, j) * p[j];
      }
    Matrix out(n, n);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) out(j, l) = (j == l ? pp : Complex{}) - up[l] * p[j];
    return out;
  });
}

/// Unordered pairs (i <= j) in lexicographic order; index of pair (i, j).
inline std::vector<std::pair<int, int>> symmetric_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out.emplace_back(i, j);
  return out;
}

inline int pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// Linearized Ricci principal part on the symmetric perturbation h:
/// h -> 1/2 (p.p h_ij + p_i p_j h^m_m - p_i p^m h_mj - p_j p^m h_mi),
/// rows and columns indexed by ordered pairs i <= j.
inline SymbolTensor einstein_linearized_symbol(const Matrix& g) {
  Matrix ginv = inverse_metric(g);
  const int n = g.rows();
  auto pairs = symmetric_pairs(n);
  const int dim = static_cast<int>(pairs.size());
  Naming names = spacetime_names(n);
  for (const auto& [i, j] : pairs) names.dep.push_back("h" + std::to_string(i) + std::to_string(j));
  return symbol_from_quadratic(n, dim, dim, names, [&](const std::vector<Complex>& p) {
    Complex pp{};
    std::vector<Complex> up(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        pp += ginv(a, b) * p[a] * p[b];
        up[a] += ginv(a, b) * p[b];
      }
    Matrix out(dim, dim);
    // Column (k,l) is the response to the unit perturbation h_kl = h_lk = 1.
    for (int col = 0; col < dim; ++col) {
      Matrix h(n, n);
      h(pairs[col].first, pairs[col].second) = 1.0;
      h(pairs[col].second, pairs[col].first) = 1.0;
      Complex trace{};
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) trace += ginv(a, b) * h(a, b);
      for (int row = 0; row < dim; ++row) {
        auto [i, j] = pairs[row];
        Complex pi_h_j{}, pj_h_i{};
        for (int a = 0; a < n; ++a) {
          pi_h_j += up[a] * h(a, j);
          pj_h_i += up[a] * h(a, i);
        }
        out(row, col) = 0.5 * (pp * h(i, j) + p[i] * p[j] * trace - p[i] * pi_h_j - p[j] * pj_h_i);
      }
    }
    return out;
  });
}

}  // namespace charkit
