#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "charkit/parser.hpp"
#include "charkit/poly.hpp"

using namespace charkit;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ParseError parse_error_of(const std::string& text) {
  try {
    parse_system(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no parse error for: " << text;
  return ParseError("none", 0, 0);
}

}  // namespace

TEST(Parser, KleinGordon) {
  PDESystem sys = parse_system("indep x, t; dep u; param m; eq d(u,t,t) - d(u,x,x) + m^2*u = 0;");
  EXPECT_EQ(sys.n(), 2);
  EXPECT_EQ(sys.m(), 1);
  EXPECT_EQ(sys.order, 2);
  EXPECT_TRUE(sys.determined());
  VarRef utt = VarRef::jet(0, MultiIndex{1, 1}), uxx = VarRef::jet(0, MultiIndex{0, 0});
  Expr expect = Expr(utt) - Expr(uxx) + pow(Expr(VarRef::param("m")), 2) * Expr(VarRef::jet(0));
  EXPECT_TRUE(poly_equal(sys.equations[0], expect));
}

TEST(Parser, EquationStoredAsDifference) {
  PDESystem sys = parse_system("indep x; dep u; eq d(u,x) = u^2;");
  VarRef ux = VarRef::jet(0, MultiIndex{0});
  EXPECT_TRUE(poly_equal(sys.equations[0], Expr(ux) - pow(Expr(VarRef::jet(0)), 2)));
}

TEST(Parser, DerivativeArgumentsAreSorted) {
  PDESystem sys = parse_system("indep x, y; dep u; eq d(u,y,x) - d(u,x,y) = 0;");
  EXPECT_TRUE(poly_equal(sys.equations[0], Expr(0.0)));
}

TEST(Parser, ParamBindingsAndComments) {
  PDESystem sys = parse_system("# header\nindep x; dep u; # trailing\nparam c = -2.5, k;\neq d(u,x) + c*u + k = 0;");
  ASSERT_EQ(sys.params.size(), 2u);
  EXPECT_EQ(sys.param_values.at(VarRef::param("c")), Complex(-2.5));
  EXPECT_EQ(sys.param_values.count(VarRef::param("k")), 0u);
}

TEST(Parser, ImaginaryUnitAndFunctions) {
  PDESystem sys = parse_system("indep x; dep u; eq im*d(u,x) + sin(x)*cos(u) + exp(x) + sqrt(2) = 0;");
  Env env{{VarRef::indep(0), 0.0}, {VarRef::jet(0), 0.0}, {VarRef::jet(0, MultiIndex{0}), 1.0}};
  Complex v = eval(sys.equations[0], env);
  EXPECT_NEAR(std::abs(v - Complex(1.0 + std::sqrt(2.0), 1.0)), 0.0, 1e-15);
}

TEST(Parser, CanonicalFormRoundTrips) {
  for (const char* file : {"systems/kg2d.pde", "systems/monge_ampere.pde", "systems/dirac.pde", "systems/maxwell.pde",
                           "systems/einstein_linearized.pde", "systems/product_strip.pde", "systems/transport.pde"}) {
    PDESystem a = parse_system(slurp(file));
    PDESystem b = parse_system(a.canonical());
    EXPECT_EQ(a.canonical(), b.canonical()) << file;
    ASSERT_EQ(a.equations.size(), b.equations.size());
    for (std::size_t i = 0; i < a.equations.size(); ++i) EXPECT_EQ(a.equations[i], b.equations[i]) << file;
    EXPECT_EQ(a.param_values, b.param_values);
  }
}

TEST(Parser, CorpusDimensions) {
  PDESystem e = parse_system(slurp("systems/einstein_linearized.pde"));
  EXPECT_EQ(e.n(), 4);
  EXPECT_EQ(e.m(), 10);
  EXPECT_EQ(e.equation_count(), 10);
  EXPECT_EQ(e.order, 2);
  PDESystem ma = parse_system(slurp("systems/monge_ampere.pde"));
  EXPECT_EQ(ma.order, 3);
}

TEST(ParserErrors, ReportPositions) {
  ParseError e = parse_error_of("indep x;\ndep u;\neq d(u,x) + $ = 0;");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.column(), 13);
  EXPECT_NE(std::string(e.what()).find("line 3, column 13"), std::string::npos);
}

TEST(ParserErrors, UndeclaredIdentifier) {
  ParseError e = parse_error_of("indep x; dep u; eq d(u,x) + v = 0;");
  EXPECT_NE(std::string(e.what()).find("undeclared identifier 'v'"), std::string::npos);
  EXPECT_EQ(e.column(), 29);
}

TEST(ParserErrors, DerivativeOfNonDependent) {
  ParseError e = parse_error_of("indep x, y; dep u; eq d(x,y) = 0;");
  EXPECT_NE(std::string(e.what()).find("derivative of non-dependent name"), std::string::npos);
  parse_error_of("indep x; dep u; eq d(u,u) = 0;");
}

TEST(ParserErrors, EmptyEquationList) {
  ParseError e = parse_error_of("indep x; dep u;");
  EXPECT_NE(std::string(e.what()).find("empty equation list"), std::string::npos);
}

TEST(ParserErrors, NonIntegerExponent) {
  parse_error_of("indep x; dep u; eq d(u,x)^1.5 = 0;");
  parse_error_of("indep x; dep u; eq d(u,x)^x = 0;");
  parse_error_of("indep x; dep u; eq d(u,x)^-1 = 0;");
}

TEST(ParserErrors, Declarations) {
  parse_error_of("indep x, x; dep u; eq d(u,x) = 0;");
  parse_error_of("indep sin; dep u; eq u = 0;");
  parse_error_of("dep u; eq u = 0;");
  parse_error_of("indep x; eq x = 0;");
  parse_error_of("indep x; dep u; eq u = 0;");  // no derivatives: order 0
  parse_error_of("indep x; dep u; eq d(u,x) = 0");
  parse_error_of("indep x; dep u; eq d(u,x) = 0; junk");
}

TEST(ParseExpression, UsesScope) {
  Scope scope;
  scope.aux = {"s"};
  Expr e = parse_expression("s^2 + 1", scope);
  EXPECT_EQ(eval(e, {{VarRef::aux("s"), 2.0}}), Complex(5.0));
  EXPECT_THROW(parse_expression("t", scope), ParseError);
  EXPECT_THROW(parse_expression("s s", scope), ParseError);
}
