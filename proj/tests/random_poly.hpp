#pragma once

// Seeded random polynomials with small integer coefficients.

#include <random>
#include <vector>

#include "charkit/expr.hpp"

namespace charkit::testutil {

inline Expr random_poly(std::mt19937_64& rng, const std::vector<VarRef>& vars, int max_degree) {
  std::uniform_int_distribution<int> coeff(-3, 3);
  Expr out(0.0);
  // Every monomial up to max_degree, built as sorted index tuples.
  std::vector<std::vector<int>> monos{{}};
  for (int d = 1; d <= max_degree; ++d) {
    auto idx = sorted_indices(static_cast<int>(vars.size()), d);
    for (const auto& m : idx) monos.push_back(m.indices());
  }
  for (const auto& m : monos) {
    int c = coeff(rng);
    if (c == 0) continue;
    Expr term(static_cast<double>(c));
    for (int i : m) term = term * Expr(vars[i]);
    out = out + term;
  }
  return out;
}

inline Env random_env(std::mt19937_64& rng, const std::vector<VarRef>& vars) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Env env;
  for (const auto& v : vars) env[v] = unit(rng);
  return env;
}

}  // namespace charkit::testutil
