#pragma once

// JSON and CSV encodings of the toolkit's values, and readers for the
// auxiliary JSON inputs (bindings, covectors, metrics, Cauchy data, seeds).

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "charkit/charsolve.hpp"
#include "charkit/error.hpp"
#include "charkit/expr.hpp"
#include "charkit/hamjac.hpp"
#include "charkit/linalg.hpp"
#include "charkit/parser.hpp"
#include "charkit/poly.hpp"
#include "charkit/symbol.hpp"

namespace charkit {

using Json = nlohmann::json;

/// Real numbers as JSON numbers, everything else as [re, im].
inline Json complex_json(const Complex& c) {
  if (c.imag() == 0.0) return c.real();
  return Json::array({c.real(), c.imag()});
}

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw PreconditionError("expected a number or [re, im], got " + j.dump());
}

/// Constants as numbers, other expressions as printed strings.
inline Json expr_json(const Expr& e, const Naming& names) {
  if (e.is_const()) return complex_json(e.value());
  return to_string(e, names);
}

inline Json names_json(const Naming& names) {
  return {{"indep", names.indep}, {"dep", names.dep}};
}

inline Json to_json(const PDESystem& sys) {
  Json params = Json::object();
  for (const auto& p : sys.params) {
    auto it = sys.param_values.find(VarRef::param(p));
    params[p] = it == sys.param_values.end() ? Json(nullptr) : complex_json(it->second);
  }
  Json eqs = Json::array();
  for (const auto& e : sys.equations) eqs.push_back(to_string(e, sys.names));
  return {{"indep", sys.names.indep}, {"dep", sys.names.dep}, {"params", params},  {"equations", eqs},
          {"n", sys.n()},             {"m", sys.m()},           {"order", sys.order}, {"determined", sys.determined()},
          {"canonical", sys.canonical()}};
}

inline Json to_json(const SymbolTensor& st) {
  Json entries = Json::array();
  for (const auto& [idx, mat] : st.entries) {
    Json rows = Json::array();
    for (const auto& row : mat) {
      Json r = Json::array();
      for (const auto& e : row) r.push_back(expr_json(e, st.names));
      rows.push_back(r);
    }
    Json names = Json::array();
    for (int i : idx.indices()) names.push_back(st.names.indep_name(i));
    entries.push_back({{"index", idx.indices()},
                       {"index_names", names},
                       {"tensor_factor", SymbolTensor::tensor_factor(idx)},
                       {"matrix", rows}});
  }
  return {{"n", st.n},           {"m", st.m},           {"equations", st.equations},
          {"k", st.k},           {"indep", st.names.indep}, {"dep", st.names.dep},
          {"entries", entries}};
}

inline Json to_json(const PolyForm& pf, const Naming& names) {
  Json vars = Json::array();
  for (const auto& v : pf.variables) vars.push_back(names.to_string(v));
  Json terms = Json::array();
  for (const auto& t : pf.terms) terms.push_back({{"exponents", t.exponents}, {"coefficient", expr_json(t.coefficient, names)}});
  return {{"variables", vars}, {"degree", pf.degree()}, {"terms", terms}};
}

inline Json to_json(const ContactPoint& c, double t) { return {{"t", t}, {"x", c.x}, {"u", c.u}, {"p", c.p}}; }

inline Json to_json(const SolutionSheet& sheet) {
  Json trs = Json::array();
  for (const auto& tr : sheet.trajectories) {
    Json nodes = Json::array();
    for (std::size_t k = 0; k < tr.nodes.size(); ++k) nodes.push_back(to_json(tr.nodes[k], sheet.t(static_cast<int>(k))));
    trs.push_back({{"s", tr.s}, {"truncated", tr.truncated}, {"nodes", nodes}});
  }
  return {{"n", sheet.n}, {"h", sheet.h}, {"method", sheet.method}, {"trajectories", trs}};
}

/// One row per node: x1..xn,u,p1..pn,s,t (s1..sd when the parameter has
/// several components).
inline std::string to_csv(const SolutionSheet& sheet) {
  std::ostringstream os;
  const int n = sheet.n;
  const int d = sheet.trajectories.empty() ? 0 : static_cast<int>(sheet.trajectories[0].s.size());
  for (int i = 0; i < n; ++i) os << "x" << i + 1 << ",";
  os << "u,";
  for (int i = 0; i < n; ++i) os << "p" << i + 1 << ",";
  if (d == 1) {
    os << "s,";
  } else {
    for (int a = 0; a < d; ++a) os << "s" << a + 1 << ",";
  }
  os << "t\n";
  for (const auto& tr : sheet.trajectories)
    for (std::size_t k = 0; k < tr.nodes.size(); ++k) {
      const auto& c = tr.nodes[k];
      for (double v : c.x) os << format_double(v) << ",";
      os << format_double(c.u) << ",";
      for (double v : c.p) os << format_double(v) << ",";
      for (double v : tr.s) os << format_double(v) << ",";
      os << format_double(sheet.t(static_cast<int>(k))) << "\n";
    }
  return os.str();
}

inline Json to_json(const LagrangianSheet& sheet) {
  Json trs = Json::array();
  for (std::size_t j = 0; j < sheet.trajectories.size(); ++j) {
    const auto& tr = sheet.trajectories[j];
    Json nodes = Json::array();
    for (std::size_t k = 0; k < tr.nodes.size(); ++k)
      nodes.push_back({{"t", k * sheet.h}, {"x", tr.nodes[k].x}, {"p", tr.nodes[k].p}});
    Json s = j < sheet.s.size() ? Json::array({sheet.s[j]}) : Json::array();
    trs.push_back({{"s", s}, {"truncated", tr.truncated}, {"nodes", nodes}});
  }
  return {{"n", sheet.n}, {"h", sheet.h}, {"method", "RK4"}, {"trajectories", trs}};
}

inline Json to_json(const EvalResult& r, const std::vector<double>& x) {
  Json branches = Json::array();
  for (const auto& b : r.branches) branches.push_back({{"u", b.u}, {"p", b.p}, {"s", b.s}, {"t", b.t}});
  return {{"x", x}, {"out_of_domain", r.out_of_domain}, {"branches", branches}};
}

inline std::vector<double> real_vector(const Json& j, const char* what = "vector") {
  if (!j.is_array()) throw PreconditionError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw PreconditionError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::vector<Complex> complex_vector(const Json& j) {
  if (!j.is_array()) throw PreconditionError("covector must be an array");
  std::vector<Complex> out;
  for (const auto& v : j) out.push_back(complex_from_json(v));
  return out;
}

inline Matrix matrix_from_json(const Json& j) {
  const Json& rows = j.is_object() && j.contains("metric") ? j.at("metric") : j;
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) throw PreconditionError("metric must be a nested array");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(m.cols())) throw PreconditionError("metric rows differ in length");
    for (int c = 0; c < m.cols(); ++c) m(r, c) = complex_from_json(rows[r][c]);
  }
  return m;
}

/// {"name or d(u,x,...)": value, ...}: every key must parse to a single symbol.
inline Env env_from_json(const Json& bindings, const Scope& scope) {
  if (!bindings.is_object()) throw PreconditionError("bindings must be a JSON object");
  Env env;
  for (const auto& [key, value] : bindings.items()) {
    Expr e = parse_expression(key, scope);
    if (e.op() != Op::Var) throw PreconditionError("binding key '" + key + "' is not a single symbol");
    env[e.var()] = complex_from_json(value);
  }
  return env;
}

/// Environment file: bindings live under "bindings" (or are the whole object).
inline Env env_file_bindings(const Json& j, const Scope& scope) {
  if (j.contains("bindings")) return env_from_json(j.at("bindings"), scope);
  Json copy = j;
  for (const char* k : {"covector", "samples", "metric"}) copy.erase(k);
  return env_from_json(copy, scope);
}

/// Either a list of samples (numbers or arrays) or {"from", "to", "count"}.
inline std::vector<std::vector<double>> parameter_samples(const Json& j, int d) {
  std::vector<std::vector<double>> out;
  if (j.is_object()) {
    if (d != 1) throw PreconditionError("a {from, to, count} range needs a one-parameter family");
    double from = j.at("from").get<double>(), to = j.at("to").get<double>();
    int count = j.at("count").get<int>();
    if (count < 1) throw PreconditionError("sample count must be positive");
    for (int i = 0; i < count; ++i) out.push_back({count == 1 ? from : from + (to - from) * i / (count - 1)});
    return out;
  }
  if (!j.is_array()) throw PreconditionError("parameter samples must be a list or a range");
  for (const auto& v : j) {
    if (v.is_number()) {
      out.push_back({v.get<double>()});
    } else {
      out.push_back(real_vector(v, "parameter sample"));
    }
    if (static_cast<int>(out.back().size()) != d) throw PreconditionError("parameter sample has wrong dimension");
  }
  return out;
}

inline std::vector<Expr> expr_list(const Json& j, const Scope& scope, const char* what) {
  if (!j.is_array()) throw PreconditionError(std::string(what) + " must be a list of expressions");
  std::vector<Expr> out;
  for (const auto& v : j) out.push_back(v.is_string() ? parse_expression(v.get<std::string>(), scope) : Expr(complex_from_json(v)));
  return out;
}

inline Expr expr_value(const Json& j, const Scope& scope) {
  return j.is_string() ? parse_expression(j.get<std::string>(), scope) : Expr(complex_from_json(j));
}

struct CauchyInput {
  CauchyData data;
  std::vector<std::vector<double>> samples;
};

/// {"surface": [...], "value": ..., "guess": [...], "s": samples}; the
/// expressions may use the parameter symbols s (or s1, s2, ...) and the
/// system's parameters.
inline CauchyInput cauchy_from_json(const Json& j, const PDESystem& sys) {
  const int d = sys.n() - 1;
  Scope scope = scope_of(sys, CauchyData::parameter_names(d));
  scope.names.indep.clear();
  scope.names.dep.clear();
  CauchyInput in;
  in.data.surface = expr_list(j.at("surface"), scope, "surface");
  in.data.value = expr_value(j.at("value"), scope);
  in.data.guess = expr_list(j.at("guess"), scope, "guess");
  if (d == 0) {
    in.samples = {{}};
  } else {
    in.samples = parameter_samples(j.at("s"), d);
  }
  return in;
}

struct SeedInput {
  std::vector<PhasePoint> points;
  std::vector<double> s;
};

/// Either {"points": [{"x", "p", "s"}...]} or a parametric family
/// {"x": [...], "p": [...], "s": samples} in the parameter symbol s.
inline SeedInput seed_from_json(const Json& j, const HamiltonianSystem& sys) {
  SeedInput in;
  if (j.contains("points")) {
    for (const auto& pt : j.at("points")) {
      in.points.push_back({real_vector(pt.at("x"), "x"), real_vector(pt.at("p"), "p")});
      if (pt.contains("s")) in.s.push_back(pt.at("s").get<double>());
    }
    return in;
  }
  Scope scope;
  for (const auto& [v, _] : sys.params) scope.params.push_back(v.name);
  scope.aux = {"s"};
  auto xs = expr_list(j.at("x"), scope, "x");
  auto ps = expr_list(j.at("p"), scope, "p");
  if (static_cast<int>(xs.size()) != sys.n || static_cast<int>(ps.size()) != sys.n)
    throw PreconditionError("seed family needs n expressions for x and for p");
  std::vector<Expr> all(xs);
  all.insert(all.end(), ps.begin(), ps.end());
  ProgramSet prog(all, {VarRef::aux("s")}, sys.params, sys.names);
  auto samples = j.contains("s") ? parameter_samples(j.at("s"), 1) : std::vector<std::vector<double>>{{0.0}};
  for (const auto& s : samples) {
    std::vector<double> v(2 * sys.n);
    prog(s, v);
    in.points.push_back(detail::phase_point(v, sys.n));
    in.s.push_back(s[0]);
  }
  return in;
}

}  // namespace charkit
