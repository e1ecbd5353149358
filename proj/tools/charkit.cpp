// Command-line front end: parse systems, compute symbols and characteristic
// data, solve first-order problems by characteristics, sweep Hamiltonian flows.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "charkit/builtin.hpp"
#include "charkit/charsolve.hpp"
#include "charkit/hamjac.hpp"
#include "charkit/io.hpp"
#include "charkit/parser.hpp"
#include "charkit/symbol.hpp"

using namespace charkit;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Accepts either a path or an inline JSON document.
Json read_json(const std::string& arg) {
  auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return Json::parse(arg);
  return Json::parse(read_file(arg));
}

struct Loaded {
  std::optional<PDESystem> sys;
  SymbolTensor st;
  Scope scope;
};

Matrix metric_or_default(const std::string& metric, int dim) {
  if (!metric.empty()) return matrix_from_json(read_json(metric));
  return minkowski(dim);
}

SymbolTensor builtin_symbol(const std::string& name, const std::string& metric, int dim) {
  if (name == "dirac") {
    if (!metric.empty()) throw PreconditionError("the dirac builtin uses the fixed Minkowski representation");
    return dirac_symbol();
  }
  Matrix g = metric_or_default(metric, dim);
  if (name == "maxwell") return maxwell_symbol(g);
  if (name == "einstein") return einstein_linearized_symbol(g);
  if (name == "wave") return wave_symbol(g);
  throw UsageError("unknown builtin '" + name + "' (expected dirac, maxwell, einstein or wave)");
}

// A system file, or builtin:<name> for the built-in symbols.
Loaded load(const std::string& file, const std::string& metric = {}, int dim = 4) {
  Loaded out;
  const std::string prefix = "builtin:";
  if (file.rfind(prefix, 0) == 0) {
    out.st = builtin_symbol(file.substr(prefix.size()), metric, dim);
    out.scope.names = out.st.names;
    return out;
  }
  std::string text = read_file(file);
  try {
    out.sys = parse_system(text);
  } catch (const ParseError& e) {
    throw ParseError(file + ": " + e.detail(), e.line(), e.column());
  }
  out.st = principal_symbol(*out.sys);
  out.scope = scope_of(*out.sys);
  return out;
}

// Bindings from --at, with numeric parameter values from the file as defaults.
Env load_env(const Loaded& l, const std::string& at, Json* doc = nullptr) {
  Env env;
  if (l.sys) env = l.sys->param_values;
  if (at.empty()) return env;
  Json j = read_json(at);
  for (const auto& [k, v] : env_file_bindings(j, l.scope)) env[k] = v;
  if (doc) *doc = j;
  return env;
}

std::uint64_t effective_seed(std::uint64_t seed) {
  if (const char* s = std::getenv("CHARKIT_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw UsageError(std::string("CHARKIT_SEED is not an unsigned integer: ") + s);
    }
  }
  return seed;
}

void emit(const Json& j, const std::string& output) {
  std::string text = j.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + output + "'");
  out << text;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Json complex_list(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (const auto& c : v) out.push_back(complex_json(c));
  return out;
}

int indep_index(const Naming& names, const std::string& name) {
  for (std::size_t i = 0; i < names.indep.size(); ++i)
    if (names.indep[i] == name) return static_cast<int>(i);
  throw UsageError("unknown independent variable '" + name + "'");
}

// H = lhs when the right side is a constant E, otherwise H = lhs - rhs at level 0.
HamiltonianSystem hamiltonian_from_file(const std::string& path) {
  PDESystem sys;
  try {
    sys = parse_system(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line(), e.column());
  }
  if (sys.m() != 1 || sys.equation_count() != 1 || sys.order != 1)
    throw PreconditionError("a Hamiltonian file holds one first-order equation in one unknown");
  Expr rhs = charkit::bind(sys.rhs[0], sys.param_values);
  if (rhs.is_const()) {
    if (rhs.value().imag() != 0.0) throw PreconditionError("energy level must be real");
    return HamiltonianSystem(sys.n(), sys.lhs[0], rhs.value().real(), sys.param_values, sys.names);
  }
  return HamiltonianSystem(sys.n(), sys.equations[0], 0.0, sys.param_values, sys.names);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"charkit: principal symbols, characteristics and Hamilton-Jacobi flows"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  std::string file, at, output, metric, surface, covector, time_name, cauchy, query, csv, hamiltonian, seed_family;
  std::uint64_t seed = 0;
  int trials = 16, steps = 1000, dim = 4;
  double h = 1e-3, tol = 1e-8;

  auto* parse = app.add_subcommand("parse", "echo the canonical form and dimensions of a system");
  parse->add_option("file", file, "system file")->required();
  bool as_json = false;
  parse->add_flag("--json", as_json, "print a JSON summary instead of the canonical text");
  parse->add_option("-o,--output", output, "write JSON here instead of stdout");

  auto* symbol = app.add_subcommand("symbol", "principal symbol as JSON");
  auto* charpoly = app.add_subcommand("charpoly", "det A(p) in normal form");
  auto* rank = app.add_subcommand("rank", "generic rank, and the rank at a covector");
  auto* check = app.add_subcommand("check-surface", "characteristic test for a surface z = 0");
  auto* charpde = app.add_subcommand("charpde", "first-order equation of characteristic surfaces");
  for (auto* sub : {symbol, charpoly, rank, check, charpde}) {
    sub->add_option("file", file, "system file or builtin:<name>")->required();
    sub->add_option("--at", at, "JSON bindings (file or inline)");
    sub->add_option("--metric", metric, "metric for builtin symbols (JSON)");
    sub->add_option("--dim", dim, "dimension for builtin symbols")->check(CLI::Range(1, 16));
    sub->add_option("-o,--output", output, "write JSON here instead of stdout");
  }
  for (auto* sub : {rank, check}) {
    sub->add_option("--seed", seed, "random seed for the generic rank");
    sub->add_option("--trials", trials, "random covectors for the generic rank")->check(CLI::PositiveNumber);
  }
  rank->add_option("--covector", covector, "covector as a JSON array");
  check->add_option("--surface", surface, "surface function z, or 'lhs = rhs'")->required();
  charpde->add_option("--time", time_name, "coordinate solved for (default: last)");

  auto* solve = app.add_subcommand("solve", "method of characteristics for one first-order equation");
  solve->add_option("file", file, "system file")->required();
  solve->add_option("--cauchy", cauchy, "Cauchy data JSON")->required();
  solve->add_option("--h", h, "step size")->check(CLI::PositiveNumber);
  solve->add_option("--steps", steps, "number of steps")->check(CLI::PositiveNumber);
  solve->add_option("--query", query, "query points: [[x...], ...] or [{\"x\": [...]}, ...]");
  solve->add_option("--csv", csv, "also write the sheet as CSV");
  solve->add_option("-o,--output", output, "write JSON here instead of stdout");

  auto* hjflow = app.add_subcommand("hjflow", "sweep a Lagrangian sheet along a Hamiltonian flow");
  hjflow->add_option("--hamiltonian", hamiltonian, "Hamiltonian file (one equation H = E)")->required();
  hjflow->add_option("--seed-family", seed_family, "seed JSON")->required();
  hjflow->add_option("--h", h, "step size")->check(CLI::PositiveNumber);
  hjflow->add_option("--steps", steps, "number of steps")->check(CLI::PositiveNumber);
  hjflow->add_option("--tol", tol, "allowed |H - E| on the seed")->check(CLI::PositiveNumber);
  hjflow->add_option("-o,--output", output, "write JSON here instead of stdout");

  std::string builtin_name;
  auto* builtin = app.add_subcommand("builtin", "emit a built-in symbol");
  builtin->add_option("name", builtin_name, "dirac | maxwell | einstein | wave")->required();
  builtin->add_option("--metric", metric, "background metric (JSON)");
  builtin->add_option("--dim", dim, "dimension with the default Minkowski metric")->check(CLI::Range(1, 16));
  builtin->add_option("-o,--output", output, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (parse->parsed()) {
      Loaded l = load(file);
      if (!l.sys) throw UsageError("parse expects a system file");
      if (as_json) {
        emit(to_json(*l.sys), output);
        return 0;
      }
      std::cout << l.sys->canonical();
      std::cout << "# n=" << l.sys->n() << " m=" << l.sys->m() << " equations=" << l.sys->equation_count()
                << " order=" << l.sys->order << (l.sys->determined() ? " determined" : " not determined") << "\n";
    } else if (symbol->parsed()) {
      Loaded l = load(file, metric, dim);
      SymbolTensor st = l.st;
      if (!at.empty()) {
        Env env = load_env(l, at);
        for (auto& [idx, mat] : st.entries)
          for (auto& row : mat)
            for (auto& e : row) e = charkit::bind(e, env);
      }
      emit(to_json(st), output);
    } else if (charpoly->parsed()) {
      Loaded l = load(file, metric, dim);
      Env env = load_env(l, at);
      PolyForm pf = char_det(l.st, env);
      Naming names = l.st.names;
      Json j = to_json(pf, names);
      j["homogeneous_degree"] = l.st.m * l.st.k;
      emit(j, output);
    } else if (rank->parsed()) {
      Loaded l = load(file, metric, dim);
      Json doc;
      Env env = load_env(l, at, &doc);
      std::uint64_t s = effective_seed(seed);
      int r = generic_rank(l.st, env, s, trials);
      Json j = {{"generic_rank", r}, {"seed", s}, {"trials", trials}, {"rows", l.st.equations}, {"cols", l.st.m}};
      std::optional<std::vector<Complex>> p;
      if (!covector.empty()) {
        p = complex_vector(Json::parse(covector));
      } else if (doc.is_object() && doc.contains("covector")) {
        p = complex_vector(doc.at("covector"));
      }
      if (p) {
        require_nonzero(*p);
        Matrix a = symbol_matrix(l.st, env, *p);
        int rk = numeric_rank(a);
        j["covector"] = complex_list(*p);
        j["rank"] = rk;
        j["defect"] = std::max(0, r - rk);
        j["characteristic"] = rk < r;
        j["kernel_dim"] = null_space(a).rows();
        j["left_kernel_dim"] = left_null_space(a).rows();
      }
      emit(j, output);
    } else if (check->parsed()) {
      Loaded l = load(file, metric, dim);
      Expr z;
      if (auto eqpos = surface.find('='); eqpos != std::string::npos) {
        z = parse_expression(surface.substr(0, eqpos), l.scope) - parse_expression(surface.substr(eqpos + 1), l.scope);
      } else {
        z = parse_expression(surface, l.scope);
      }
      Json doc;
      Env base = load_env(l, at, &doc);
      std::vector<Env> samples;
      if (doc.is_object() && doc.contains("samples")) {
        for (const auto& sj : doc.at("samples")) {
          Env env = base;
          for (const auto& [k, v] : env_from_json(sj, l.scope)) env[k] = v;
          samples.push_back(env);
        }
      } else {
        samples.push_back(base);
      }
      SurfaceReport rep = check_surface(l.st, z, samples, effective_seed(seed), trials);
      Json js = Json::array();
      for (const auto& s : rep.samples)
        js.push_back({{"covector", complex_list(s.covector)},
                      {"surface_residual", s.surface_residual},
                      {"generic_rank", s.generic_rank},
                      {"rank", s.rank},
                      {"defect", s.defect},
                      {"characteristic", s.characteristic},
                      {"constraints", matrix_json(s.constraints)}});
      emit({{"surface", to_string(z, l.st.names)}, {"samples", js}, {"note", rep.note}}, output);
    } else if (charpde->parsed()) {
      Loaded l = load(file, metric, dim);
      Env env = load_env(l, at);
      std::optional<int> t;
      if (!time_name.empty()) t = indep_index(l.st.names, time_name);
      WavefrontPde w = char_surface_pde(l.st, env, t);
      Naming fo = w.first_order_names();
      Json slopes = Json::array();
      for (const auto& v : w.slopes) slopes.push_back(v.name);
      emit({{"time", l.st.names.indep_name(w.time)},
            {"slopes", slopes},
            {"equation", to_string(w.expr, l.st.names)},
            {"first_order", {{"indep", fo.indep}, {"dep", fo.dep}, {"equation", to_string(w.as_first_order(), fo)}}}},
           output);
    } else if (solve->parsed()) {
      Loaded l = load(file);
      if (!l.sys) throw UsageError("solve expects a system file");
      ScalarPde pde = scalar_pde(*l.sys);
      CauchyInput in = cauchy_from_json(read_json(cauchy), *l.sys);
      Strip strip = build_strip(pde, in.data, in.samples);
      SolutionSheet sheet = integrate_characteristics(pde, strip, h, steps);
      Json j = {{"sheet", to_json(sheet)}, {"warnings", strip.warnings}};
      ContactResidual cr = contact_residual(pde, sheet);
      j["diagnostics"] = {{"first_integral_drift", first_integral_drift(pde, sheet)},
                          {"contact_residual_step", cr.max_step},
                          {"contact_residual_accumulated", cr.max_accumulated}};
      if (!query.empty()) {
        Json qs = read_json(query), answers = Json::array();
        if (!qs.is_array()) throw PreconditionError("queries must be a JSON array");
        for (const auto& q : qs) {
          auto x = real_vector(q.is_object() ? q.at("x") : q, "query point");
          answers.push_back(to_json(eval_solution(sheet, x), x));
        }
        j["queries"] = answers;
      }
      if (!csv.empty()) {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw UsageError("cannot write '" + csv + "'");
        out << to_csv(sheet);
      }
      emit(j, output);
    } else if (hjflow->parsed()) {
      HamiltonianSystem sys = hamiltonian_from_file(hamiltonian);
      SeedInput in = seed_from_json(read_json(seed_family), sys);
      SweepOptions opts;
      opts.tol = tol;
      LagrangianSheet sheet = sweep_lagrangian(sys, in.points, in.s, h, steps, opts);
      Json j = {{"sheet", to_json(sheet)},
                {"energy", sys.E},
                {"hamiltonian", to_string(sys.H, sys.names)},
                {"energy_drift", energy_drift(sys, sheet.trajectories)},
                {"warnings", sheet.warnings}};
      j["isotropy_defect"] = sheet.n == 1 || sheet.trajectories.size() >= 2 ? Json(isotropy_defect(sheet)) : Json(nullptr);
      emit(j, output);
    } else if (builtin->parsed()) {
      emit(to_json(builtin_symbol(builtin_name, metric, dim)), output);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const Json::parse_error& e) {
    std::cerr << "parse error: JSON input at byte " << e.byte << ": " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 4;
  } catch (const Json::exception& e) {
    std::cerr << "precondition violated: malformed JSON input: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
