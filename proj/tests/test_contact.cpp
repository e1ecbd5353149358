#include <gtest/gtest.h>

#include <random>

#include "charkit/contact.hpp"
#include "charkit/poly.hpp"
#include "random_poly.hpp"

using namespace charkit;

namespace {

constexpr int kN = 2;

std::vector<VarRef> coords() {
  std::vector<VarRef> v;
  for (int i = 0; i < kN; ++i) v.push_back(jet1::x(i));
  v.push_back(jet1::u());
  for (int i = 0; i < kN; ++i) v.push_back(jet1::p(i));
  return v;
}

bool fields_equal(const VectorField& a, const VectorField& b) {
  for (std::size_t c = 0; c < a.comps.size(); ++c)
    if (!poly_equal(a.comps[c], b.comps[c])) return false;
  return true;
}

}  // namespace

TEST(ContactField, Coordinates) {
  // f = u_1: translation along x^1.
  VectorField v = contact_field(Expr(jet1::p(0)), kN);
  EXPECT_TRUE(v.dx(0).is_const(1.0));
  EXPECT_TRUE(v.dx(1).is_const(0.0));
  EXPECT_TRUE(poly_equal(v.du(), Expr(0.0)));
  // f = 1 generates -d/du.
  VectorField one = contact_field(Expr(1.0), kN);
  EXPECT_TRUE(poly_equal(one.du(), Expr(-1.0)));
  EXPECT_TRUE(poly_equal(jacobi_bracket(Expr(1.0), Expr(jet1::u()), kN), Expr(-1.0)));
}

TEST(ContactField, RejectsHigherJets) {
  EXPECT_THROW(contact_field(Expr(VarRef::jet(0, MultiIndex{0, 0})), kN), PreconditionError);
  EXPECT_THROW(contact_field(Expr(jet1::x(2)), kN), PreconditionError);
}

TEST(ContactAlgebra, RandomPolynomials) {
  std::mt19937_64 rng(2024);
  auto vars = coords();
  for (int trial = 0; trial < 50; ++trial) {
    Expr f = testutil::random_poly(rng, vars, 2);
    Expr g = testutil::random_poly(rng, vars, 2);
    Expr F = testutil::random_poly(rng, vars, 2);
    VectorField xf = contact_field(f, kN), xg = contact_field(g, kN);
    Expr bracket = jacobi_bracket(f, g, kN);
    EXPECT_TRUE(fields_equal(commutator(xf, xg), contact_field(bracket, kN))) << "trial " << trial;
    EXPECT_TRUE(poly_equal(bracket, -jacobi_bracket(g, f, kN))) << "trial " << trial;
    EXPECT_TRUE(poly_equal(contact_pairing(xf), -f)) << "trial " << trial;
    VectorField yF = char_field(F, kN);
    EXPECT_TRUE(poly_equal(yF.apply(F), Expr(0.0))) << "trial " << trial;
    EXPECT_TRUE(poly_equal(contact_pairing(yF), Expr(0.0))) << "trial " << trial;
  }
}

TEST(ContactAlgebra, JacobiIdentity) {
  std::mt19937_64 rng(99);
  auto vars = coords();
  for (int trial = 0; trial < 10; ++trial) {
    Expr f = testutil::random_poly(rng, vars, 2), g = testutil::random_poly(rng, vars, 2),
         h = testutil::random_poly(rng, vars, 2);
    auto br = [](const Expr& a, const Expr& b) { return jacobi_bracket(a, b, kN); };
    Expr cyc = br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g));
    EXPECT_TRUE(poly_equal(cyc, Expr(0.0)));
  }
}

TEST(ContactAlgebra, NonPolynomialGenerators) {
  Expr f = sin(Expr(jet1::x(0))) * Expr(jet1::p(1)) + exp(Expr(jet1::u()));
  Expr g = Expr(jet1::p(0)) * Expr(jet1::p(0)) * cos(Expr(jet1::x(1)));
  VectorField lhs = commutator(contact_field(f, kN), contact_field(g, kN));
  VectorField rhs = contact_field(jacobi_bracket(f, g, kN), kN);
  EXPECT_TRUE(fields_equal(lhs, rhs));
}

TEST(CharField, ProductEquation) {
  // F = u - u_1 u_2: x1' = -u_2, x2' = -u_1, u_i' = -u_i, u' = -2 u_1 u_2.
  Expr p1 = Expr(jet1::p(0)), p2 = Expr(jet1::p(1));
  Expr F = Expr(jet1::u()) - p1 * p2;
  VectorField y = char_field(F, kN);
  EXPECT_TRUE(poly_equal(y.dx(0), -p2));
  EXPECT_TRUE(poly_equal(y.dx(1), -p1));
  EXPECT_TRUE(poly_equal(y.dp(0), -p1));
  EXPECT_TRUE(poly_equal(y.dp(1), -p2));
  EXPECT_TRUE(poly_equal(y.du(), -2.0 * p1 * p2));
}
