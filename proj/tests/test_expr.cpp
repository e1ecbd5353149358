#include <gtest/gtest.h>

#include <random>

#include "charkit/expr.hpp"
#include "charkit/parser.hpp"
#include "charkit/poly.hpp"
#include "random_poly.hpp"

using namespace charkit;

namespace {

const VarRef x1 = VarRef::indep(0);
const VarRef x2 = VarRef::indep(1);
const VarRef u = VarRef::jet(0);

VarRef uxx() { return VarRef::jet(0, MultiIndex{0, 0}); }
VarRef uxy() { return VarRef::jet(0, MultiIndex{0, 1}); }

}  // namespace

TEST(MultiIndex, SortsAndCounts) {
  MultiIndex i{2, 0, 2};
  EXPECT_EQ(i.indices(), (std::vector<int>{0, 2, 2}));
  EXPECT_EQ(i.order(), 3);
  EXPECT_EQ(i.count(2), 2);
  EXPECT_EQ(i.with(1).indices(), (std::vector<int>{0, 1, 2, 2}));
  EXPECT_EQ(MultiIndex{}.order(), 0);
}

TEST(MultiIndex, SortedIndicesEnumeratesMultisets) {
  // C(n + k - 1, k) multisets of size k from n symbols.
  EXPECT_EQ(sorted_indices(4, 2).size(), 10u);
  EXPECT_EQ(sorted_indices(2, 3).size(), 4u);
  EXPECT_EQ(sorted_indices(3, 0).size(), 1u);
}

TEST(Diff, PowerRule) { EXPECT_TRUE(poly_equal(diff(Expr(x1) * Expr(x1), x1), 2.0 * Expr(x1))); }

TEST(Diff, JetCoordinatesAreIndependent) {
  EXPECT_EQ(diff(Expr(uxx()) * Expr(uxy()), uxx()), Expr(uxy()));
  EXPECT_TRUE(diff(Expr(uxx()), x1).is_const(0.0));
}

TEST(Diff, Functions) {
  EXPECT_EQ(diff(sin(Expr(x1)) * Expr(u), u), sin(Expr(x1)));
  Expr e = exp(2.0 * Expr(x1)) + cos(Expr(x1)) + sqrt(Expr(x1));
  Env env{{x1, 0.7}};
  Complex expect = 2.0 * std::exp(1.4) - std::sin(0.7) + 0.5 / std::sqrt(0.7);
  EXPECT_NEAR(std::abs(eval(diff(e, x1), env) - expect), 0.0, 1e-14);
}

TEST(Eval, Basics) {
  EXPECT_EQ(eval(pow(Expr(x1), 2) - 1.0, {{x1, 2.0}}), Complex(3.0));
  // u_1 u_2 on the strip u_1 = 2s, u_2 = s/2 at s = 1.
  VarRef p1 = VarRef::jet(0, MultiIndex{0}), p2 = VarRef::jet(0, MultiIndex{1});
  EXPECT_EQ(eval(Expr(p1) * Expr(p2), {{p1, 2.0}, {p2, 0.5}}), Complex(1.0));
  EXPECT_EQ(eval(Expr(Complex(0, 1)) * Expr(Complex(0, 1)), {}), Complex(-1.0));
}

TEST(Eval, DivisionByZeroIsNumericError) {
  EXPECT_THROW(eval(1.0 / Expr(x1), {{x1, 0.0}}), NumericError);
  EXPECT_THROW(eval(Expr(1.0) / Expr(0.0), {}), NumericError);
}

TEST(Eval, UnboundListsMissing) {
  try {
    eval(Expr(x1) + Expr(x2) + Expr(u), {{x2, 1.0}});
    FAIL() << "expected UnboundError";
  } catch (const UnboundError& e) {
    EXPECT_EQ(e.missing().size(), 2u);
  }
}

TEST(Substitute, EikonalSubstitution) {
  VarRef pt = VarRef::aux("p_t"), px = VarRef::aux("p_x"), tau = VarRef::aux("tau_x");
  Expr e = pow(Expr(pt), 2) - pow(Expr(px), 2);
  Expr s = substitute(e, {{pt, Expr(1.0)}, {px, -Expr(tau)}});
  EXPECT_TRUE(poly_equal(s, 1.0 - pow(Expr(tau), 2)));
}

TEST(Substitute, IdentityAndZero) {
  EXPECT_EQ(substitute(Expr(x1), {}), Expr(x1));
  VarRef p = VarRef::jet(0, MultiIndex{0});
  EXPECT_TRUE(substitute(Expr(u) * Expr(p), {{u, Expr(0.0)}}).is_const(0.0));
}

TEST(Substitute, IsSimultaneous) {
  Expr e = Expr(x1) - Expr(x2);
  Expr s = substitute(e, {{x1, Expr(x2)}, {x2, Expr(x1)}});
  EXPECT_TRUE(poly_equal(s, Expr(x2) - Expr(x1)));
}

TEST(Folding, ConstantsOnly) {
  EXPECT_TRUE((Expr(2.0) * Expr(3.0)).is_const(6.0));
  EXPECT_EQ(Expr(x1) * 1.0, Expr(x1));
  EXPECT_TRUE((Expr(x1) * 0.0).is_const(0.0));
  EXPECT_EQ(pow(Expr(x1), 1), Expr(x1));
  EXPECT_TRUE(pow(Expr(x1), 0).is_const(1.0));
  // No algebraic simplification beyond constants.
  EXPECT_FALSE((Expr(x1) - Expr(x1)).is_const());
}

TEST(PolyNormalize, Binomial) {
  VarRef p = VarRef::aux("p"), q = VarRef::aux("q");
  PolyForm pf = poly_normalize(pow(Expr(p) + Expr(q), 2), {p, q});
  ASSERT_EQ(pf.terms.size(), 3u);
  EXPECT_EQ(pf.terms[0].exponents, (std::vector<int>{2, 0}));
  EXPECT_TRUE(pf.terms[0].coefficient.is_const(1.0));
  EXPECT_EQ(pf.terms[1].exponents, (std::vector<int>{1, 1}));
  EXPECT_TRUE(pf.terms[1].coefficient.is_const(2.0));
  EXPECT_EQ(pf.terms[2].exponents, (std::vector<int>{0, 2}));
  EXPECT_TRUE(pf.is_homogeneous(2));
}

TEST(PolyNormalize, CoefficientsKeepOtherSymbols) {
  VarRef p = VarRef::aux("p");
  PolyForm pf = poly_normalize(Expr(u) * Expr(p) + Expr(p) * sin(Expr(x1)), {p});
  ASSERT_EQ(pf.terms.size(), 1u);
  EXPECT_TRUE(poly_equal(pf.terms[0].coefficient, Expr(u) + sin(Expr(x1))));
}

TEST(PolyNormalize, RejectsNonPolynomialDependence) {
  VarRef p = VarRef::aux("p");
  EXPECT_THROW(poly_normalize(sin(Expr(p)), {p}), PreconditionError);
  EXPECT_THROW(poly_normalize(1.0 / Expr(p), {p}), PreconditionError);
}

TEST(PolyNormalize, Idempotent) {
  std::mt19937_64 rng(7);
  std::vector<VarRef> vars{x1, x2, u};
  for (int t = 0; t < 20; ++t) {
    Expr e = testutil::random_poly(rng, vars, 3) * testutil::random_poly(rng, vars, 1);
    PolyForm a = poly_normalize(e, vars);
    PolyForm b = poly_normalize(a.to_expr(), vars);
    ASSERT_EQ(a.terms.size(), b.terms.size());
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
      EXPECT_EQ(a.terms[i].exponents, b.terms[i].exponents);
      EXPECT_EQ(a.terms[i].coefficient, b.terms[i].coefficient);
    }
  }
}

TEST(Properties, DiffIsLinear) {
  std::mt19937_64 rng(11);
  std::vector<VarRef> vars{x1, x2, u, uxx()};
  for (int t = 0; t < 30; ++t) {
    Expr e1 = testutil::random_poly(rng, vars, 3), e2 = testutil::random_poly(rng, vars, 3);
    for (const auto& v : vars) {
      Expr lhs = diff(3.0 * e1 - 2.0 * e2, v);
      Expr rhs = 3.0 * diff(e1, v) - 2.0 * diff(e2, v);
      EXPECT_TRUE(poly_equal(lhs, rhs));
    }
  }
}

TEST(Properties, DiffCommutes) {
  std::mt19937_64 rng(12);
  std::vector<VarRef> vars{x1, x2, u, uxx()};
  for (int t = 0; t < 30; ++t) {
    Expr e = testutil::random_poly(rng, vars, 4) + sin(Expr(x1) * Expr(u));
    for (const auto& v : vars)
      for (const auto& w : vars) EXPECT_TRUE(poly_equal(diff(diff(e, v), w), diff(diff(e, w), v)));
  }
}

TEST(Properties, EvalSubstituteConsistency) {
  std::mt19937_64 rng(13);
  std::vector<VarRef> vars{x1, x2, u};
  for (int t = 0; t < 100; ++t) {
    Expr e = testutil::random_poly(rng, vars, 3);
    Expr g = testutil::random_poly(rng, {x2, u}, 2);
    Env env = testutil::random_env(rng, vars);
    Complex lhs = eval(substitute(e, {{x1, g}}), env);
    Env env2 = env;
    env2[x1] = eval(g, env);
    Complex rhs = eval(e, env2);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Properties, NormalFormRoundTrip) {
  std::mt19937_64 rng(14);
  std::vector<VarRef> vars{x1, x2, u};
  for (int t = 0; t < 50; ++t) {
    Expr e = testutil::random_poly(rng, vars, 2) * testutil::random_poly(rng, vars, 2) * exp(Expr(u));
    PolyForm pf = poly_normalize(e, {x1, x2});
    Env env = testutil::random_env(rng, vars);
    Complex a = eval(e, env), b = eval(pf.to_expr(), env);
    EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST(Printing, RoundTripsThroughParser) {
  Scope scope;
  scope.names.indep = {"x", "y"};
  scope.names.dep = {"u"};
  scope.params = {"m"};
  for (const char* text : {"x - (y - x)", "-x^2", "(x + y)^3 / (1 + x)", "d(u,x,y) * m - sin(x) * im", "2 * -x",
                           "x^2^1", "exp(-(x*y))", "1.5e-3 * sqrt(x)"}) {
    Expr e = parse_expression(text, scope);
    std::string printed = to_string(e, scope.names);
    Expr again = parse_expression(printed, scope);
    EXPECT_EQ(e, again) << text << " -> " << printed;
  }
}

TEST(Printing, DerivativeNotation) {
  Naming names;
  names.indep = {"x", "y"};
  names.dep = {"u"};
  EXPECT_EQ(to_string(Expr(VarRef::jet(0, MultiIndex{1, 0, 0})), names), "d(u,x,x,y)");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
}
