#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "charkit/builtin.hpp"
#include "charkit/parser.hpp"
#include "charkit/symbol.hpp"

using namespace charkit;

namespace {

PDESystem load(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_system(os.str());
}

// Determinant by the Leibniz permutation sum; independent of the LU routine.
Complex leibniz_det(const Matrix& a) {
  std::vector<int> perm(a.rows());
  std::iota(perm.begin(), perm.end(), 0);
  Complex total{};
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (std::size_t j = i + 1; j < perm.size(); ++j) inversions += perm[i] > perm[j];
    Complex term = inversions % 2 ? -1.0 : 1.0;
    for (int r = 0; r < a.rows(); ++r) term *= a(r, perm[r]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

std::vector<Complex> random_covector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Complex> p(n);
  for (auto& c : p) c = unit(rng);
  return p;
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

Expr aux(const std::string& name) { return Expr(VarRef::aux(name)); }

}  // namespace

TEST(PrincipalSymbol, KleinGordonEntries) {
  SymbolTensor st = principal_symbol(load("systems/kg2d.pde"));
  EXPECT_EQ(st.k, 2);
  ASSERT_EQ(st.entries.size(), 2u);
  EXPECT_TRUE(st.entries.at(MultiIndex{1, 1})[0][0].is_const(1.0));
  EXPECT_TRUE(st.entries.at(MultiIndex{0, 0})[0][0].is_const(-1.0));
  PolyForm det = char_det(st);
  EXPECT_TRUE(poly_equal(det.to_expr(), pow(aux("p_t"), 2) - pow(aux("p_x"), 2)));
}

TEST(PrincipalSymbol, MixedIndicesUseOrderedSums) {
  // u_xy appears once in the ordered sum; its tensor component carries 1/2.
  PDESystem sys = parse_system("indep x, y; dep u; eq d(u,x,y) = 0;");
  SymbolTensor st = principal_symbol(sys);
  EXPECT_TRUE(poly_equal(char_det(st).to_expr(), aux("p_x") * aux("p_y")));
  EXPECT_DOUBLE_EQ(SymbolTensor::tensor_factor(MultiIndex{0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(SymbolTensor::tensor_factor(MultiIndex{0, 0, 1}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(SymbolTensor::tensor_factor(MultiIndex{1, 1}), 1.0);
}

TEST(PrincipalSymbol, MongeAmpere) {
  PDESystem sys = load("systems/monge_ampere.pde");
  SymbolTensor st = principal_symbol(sys);
  EXPECT_EQ(st.k, 3);
  auto jet = [](std::vector<int> i) { return Expr(VarRef::jet(0, MultiIndex(std::move(i)))); };
  Expr p = aux("p_x"), q = aux("p_y");
  Expr expect = jet({0, 1, 1}) * pow(p, 3) - 2.0 * jet({0, 0, 1}) * pow(p, 2) * q + jet({0, 0, 0}) * p * pow(q, 2) +
                pow(q, 3);
  PolyForm det = char_det(st);
  EXPECT_TRUE(poly_equal(det.to_expr(), expect));
  EXPECT_TRUE(det.is_homogeneous(3));
  ASSERT_EQ(det.terms.size(), 4u);
  EXPECT_EQ(det.terms[0].exponents, (std::vector<int>{3, 0}));
}

TEST(CharDet, DiracIsSquaredWaveOperator) {
  SymbolTensor st = dirac_symbol();
  Expr box = pow(aux("p_t"), 2) - pow(aux("p_x"), 2) - pow(aux("p_y"), 2) - pow(aux("p_z"), 2);
  PolyForm det = char_det(st);
  EXPECT_TRUE(poly_equal(det.to_expr(), pow(box, 2)));
  EXPECT_TRUE(det.is_homogeneous(4));
  // Numerical cross-check with a permutation-sum determinant.
  NumericSymbol ns(st, {});
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto p = random_covector(rng, 4);
    Complex b = p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
    Complex d = leibniz_det(ns.at(p));
    EXPECT_LE(std::abs(d - b * b), 1e-12 * std::max(1.0, std::abs(b * b)));
  }
}

TEST(CharDet, GammaMatricesAnticommute) {
  auto g = dirac_gammas();
  Matrix eta = minkowski(4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Matrix anti = g[a] * g[b];
      anti += g[b] * g[a];
      EXPECT_LE(max_diff(anti, Complex(2.0) * eta(a, b) * Matrix::identity(4)), 1e-15);
    }
}

TEST(CharDet, ParsedDiracMatchesBuiltin) {
  SymbolTensor parsed = principal_symbol(load("systems/dirac.pde"));
  SymbolTensor builtin = dirac_symbol();
  NumericSymbol a(parsed, {}), b(builtin, {});
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    auto p = random_covector(rng, 4);
    EXPECT_LE(max_diff(a.at(p), b.at(p)), 1e-15);
  }
}

TEST(CharDet, RequiresDeterminedSystem) {
  PDESystem sys = parse_system("indep x, y; dep u; eq d(u,x) = 0; eq d(u,y) = 0;");
  EXPECT_THROW(char_det(principal_symbol(sys)), PreconditionError);
}

TEST(Rank, MaxwellStructure) {
  SymbolTensor st = maxwell_symbol(minkowski(4));
  EXPECT_EQ(generic_rank(st, {}, 1), 3);
  std::vector<Complex> null_p{1.0, 1.0, 0.0, 0.0};
  Matrix a = symbol_matrix(st, {}, null_p);
  EXPECT_EQ(numeric_rank(a), 1);
  EXPECT_EQ(left_null_space(a).rows(), 3);
  EXPECT_TRUE(is_char_covector(st, {}, null_p, 3));
  // A non-null covector keeps the generic rank.
  EXPECT_FALSE(is_char_covector(st, {}, {1.0, 0.3, 0.0, 0.0}, 3));
  EXPECT_TRUE(poly_equal(char_det(st).to_expr(), Expr(0.0)));
}

TEST(Rank, MaxwellKernelsAreTheCovectorAndItsDual) {
  SymbolTensor st = maxwell_symbol(minkowski(4));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto p = random_covector(rng, 4);
    Matrix a = symbol_matrix(st, {}, p);
    std::vector<Complex> sharp{p[0], -p[1], -p[2], -p[3]};
    auto ap = a.apply(p);
    auto pa = a.transpose().apply(sharp);
    for (int i = 0; i < 4; ++i) {
      EXPECT_LE(std::abs(ap[i]), 1e-14);
      EXPECT_LE(std::abs(pa[i]), 1e-14);
    }
    // The other eigenvalue is g(p, p), three times.
    Complex pp = p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
    Matrix shifted = a - pp * Matrix::identity(4);
    EXPECT_EQ(numeric_rank(shifted), 1);
  }
}

TEST(Rank, ParsedMaxwellMatchesBuiltin) {
  NumericSymbol a(principal_symbol(load("systems/maxwell.pde")), {}), b(maxwell_symbol(minkowski(4)), {});
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    auto p = random_covector(rng, 4);
    EXPECT_LE(max_diff(a.at(p), b.at(p)), 1e-15);
  }
}

TEST(Rank, EinsteinStructure) {
  SymbolTensor st = einstein_linearized_symbol(minkowski(4));
  EXPECT_EQ(st.m, 10);
  EXPECT_EQ(generic_rank(st, {}, 2), 6);
  EXPECT_EQ(numeric_rank(symbol_matrix(st, {}, {1.0, 1.0, 0.0, 0.0})), 4);
  EXPECT_EQ(numeric_rank(symbol_matrix(st, {}, {1.0, 0.6, 0.8, 0.0})), 4);
}

TEST(Rank, EinsteinGaugeDirections) {
  SymbolTensor st = einstein_linearized_symbol(minkowski(4));
  std::mt19937_64 rng(8);
  auto pairs = symmetric_pairs(4);
  for (int t = 0; t < 20; ++t) {
    auto p = random_covector(rng, 4);
    auto xi = random_covector(rng, 4);
    std::vector<Complex> h(pairs.size());
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      auto [i, j] = pairs[c];
      h[c] = p[i] * xi[j] + xi[i] * p[j];
    }
    auto r = symbol_matrix(st, {}, p).apply(h);
    for (const auto& v : r) EXPECT_LE(std::abs(v), 1e-12);
  }
}

TEST(Rank, ParsedEinsteinMatchesBuiltin) {
  NumericSymbol a(principal_symbol(load("systems/einstein_linearized.pde")), {});
  NumericSymbol b(einstein_linearized_symbol(minkowski(4)), {});
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    auto p = random_covector(rng, 4);
    EXPECT_LE(max_diff(a.at(p), b.at(p)), 1e-15);
  }
}

TEST(Rank, SeededAndDeterministic) {
  SymbolTensor st = einstein_linearized_symbol(minkowski(4));
  EXPECT_EQ(generic_rank(st, {}, 42, 3), generic_rank(st, {}, 42, 3));
  EXPECT_THROW(generic_rank(st, {}, 0, 0), PreconditionError);
  EXPECT_THROW(is_char_covector(st, {}, {0.0, 0.0, 0.0, 0.0}, 6), PreconditionError);
}

TEST(Rank, NumericRankOfSimpleMatrices) {
  EXPECT_EQ(numeric_rank(Matrix{{1, 2}, {2, 4}}), 1);
  EXPECT_EQ(numeric_rank(Matrix{{1, 0}, {0, 1e-3}}), 2);
  EXPECT_EQ(numeric_rank(Matrix{{1, 0}, {0, 1e-12}}), 1);
  EXPECT_EQ(numeric_rank(Matrix(3, 3)), 0);
}

TEST(Builtin, WaveSymbolOnCustomMetric) {
  Matrix g{{2, 0}, {0, -0.5}};
  SymbolTensor st = wave_symbol(g);
  // g^{-1} = diag(1/2, -2)
  EXPECT_TRUE(poly_equal(char_det(st).to_expr(), 0.5 * pow(aux("p_t"), 2) - 2.0 * pow(aux("p_x"), 2)));
  EXPECT_THROW(wave_symbol(Matrix{{1, 1}, {1, 1}}), PreconditionError);
  EXPECT_THROW(wave_symbol(Matrix{{1, 1}, {0, 1}}), PreconditionError);
}

TEST(CheckSurface, KleinGordon) {
  PDESystem sys = load("systems/kg2d.pde");
  SymbolTensor st = principal_symbol(sys);
  Scope scope = scope_of(sys);
  Env at{{VarRef::indep(0), 0.3}, {VarRef::indep(1), 0.3}};
  SurfaceReport spacelike = check_surface(st, parse_expression("t", scope), {at});
  EXPECT_FALSE(spacelike.samples[0].characteristic);
  EXPECT_EQ(spacelike.samples[0].constraints.rows(), 0);
  SurfaceReport light = check_surface(st, parse_expression("x - t", scope), {at});
  EXPECT_TRUE(light.samples[0].characteristic);
  EXPECT_EQ(light.samples[0].defect, 1);
  EXPECT_EQ(light.samples[0].constraints.rows(), 1);
  EXPECT_LE(light.samples[0].surface_residual, 1e-15);
  EXPECT_THROW(check_surface(st, parse_expression("x^2", scope), {{{VarRef::indep(0), 0.0}}}), PreconditionError);
}

TEST(CheckSurface, VerdictDependsOnJetData) {
  PDESystem sys = load("systems/monge_ampere.pde");
  SymbolTensor st = principal_symbol(sys);
  Expr z = parse_expression("x", scope_of(sys));
  auto env = [](double uxyy) {
    return Env{{VarRef::indep(0), 0.0},
               {VarRef::indep(1), 0.0},
               {VarRef::jet(0, MultiIndex{0, 0, 0}), 1.0},
               {VarRef::jet(0, MultiIndex{0, 0, 1}), 2.0},
               {VarRef::jet(0, MultiIndex{0, 1, 1}), uxyy}};
  };
  SurfaceReport rep = check_surface(st, z, {env(0.0), env(1.5)});
  EXPECT_TRUE(rep.samples[0].characteristic);
  EXPECT_FALSE(rep.samples[1].characteristic);
  EXPECT_FALSE(rep.note.empty());
}

TEST(SymbolKernel, KleinGordonSecondOrderBlocks) {
  SymbolTensor st = principal_symbol(load("systems/kg2d.pde"));
  // v_xx, v_xt, v_tt with -v_xx + v_tt = 0.
  EXPECT_EQ(symbol_kernel(st, {}).rows(), 2);
}

TEST(CharSurfacePde, KleinGordonEikonal) {
  SymbolTensor st = principal_symbol(load("systems/kg2d.pde"));
  WavefrontPde w = char_surface_pde(st, {});
  EXPECT_EQ(w.time, 1);
  EXPECT_TRUE(poly_equal(w.expr, 1.0 - pow(aux("tau_x"), 2)));
  Expr fo = w.as_first_order();
  EXPECT_TRUE(poly_equal(fo, 1.0 - pow(Expr(VarRef::jet(0, MultiIndex{0})), 2)));
  EXPECT_EQ(w.first_order_names().indep, (std::vector<std::string>{"x"}));
}

TEST(CharSurfacePde, DiracWithTimeFirst) {
  WavefrontPde w = char_surface_pde(dirac_symbol(), {}, 0);
  Expr s = 1.0 - pow(aux("tau_x"), 2) - pow(aux("tau_y"), 2) - pow(aux("tau_z"), 2);
  EXPECT_TRUE(poly_equal(w.expr, pow(s, 2)));
}

TEST(CharSurfacePde, NeedsBackgroundForJetCoefficients) {
  PDESystem sys = load("systems/monge_ampere.pde");
  SymbolTensor st = principal_symbol(sys);
  EXPECT_THROW(char_surface_pde(st, {}), PreconditionError);
  Env bg{{VarRef::jet(0, MultiIndex{0, 0, 0}), 0.0},
         {VarRef::jet(0, MultiIndex{0, 0, 1}), 0.0},
         {VarRef::jet(0, MultiIndex{0, 1, 1}), 1.0}};
  // A(p_x = -tau, p_y = 1) = -tau^3 + 1 with time y.
  WavefrontPde w = char_surface_pde(st, bg);
  EXPECT_TRUE(poly_equal(w.expr, 1.0 - pow(aux("tau_x"), 3)));
}
