#pragma once

// Method of characteristics for a first-order scalar PDE F(x, u, du) = 0:
// lift Cauchy data (surface X(s), value mu(s)) to an initial strip in J^1,
// integrate the characteristic field from every strip point, and evaluate the
// resulting (possibly multivalued) solution at base points.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "charkit/contact.hpp"
#include "charkit/error.hpp"
#include "charkit/expr.hpp"
#include "charkit/ode.hpp"
#include "charkit/parser.hpp"

namespace charkit {

/// F(x, u, u_i) with parameters bound to real values.
struct ScalarPde {
  Expr F;
  int n = 0;
  Env params;
  Naming names;

  ScalarPde() = default;
  ScalarPde(Expr f, int dim, Env bindings = {}, Naming nm = {})
      : F(std::move(f)), n(dim), params(std::move(bindings)), names(nm.indep.empty() ? jet1::naming(dim) : std::move(nm)) {
    if (n < 1) throw PreconditionError("scalar PDE needs at least one independent variable");
    jet1::require(F, n, "first-order PDE");
  }
};

/// The single first-order equation of a parsed system.
inline ScalarPde scalar_pde(const PDESystem& sys, const Env& extra_params = {}) {
  if (sys.m() != 1 || sys.equation_count() != 1 || sys.order != 1)
    throw PreconditionError("expected one first-order equation in one unknown");
  Env params = sys.param_values;
  for (const auto& [k, v] : extra_params) params[k] = v;
  return ScalarPde(sys.equations[0], sys.n(), params, sys.names);
}

struct ContactPoint {
  std::vector<double> x;
  double u = 0.0;
  std::vector<double> p;
};

/// J^1 coordinates in state order (x^1..x^n, u_1..u_n, u).
inline std::vector<VarRef> jet1_slots(int n) {
  std::vector<VarRef> slots;
  for (int i = 0; i < n; ++i) slots.push_back(jet1::x(i));
  for (int i = 0; i < n; ++i) slots.push_back(jet1::p(i));
  slots.push_back(jet1::u());
  return slots;
}

inline std::vector<double> to_state(const ContactPoint& c) {
  std::vector<double> y(c.x);
  y.insert(y.end(), c.p.begin(), c.p.end());
  y.push_back(c.u);
  return y;
}

inline ContactPoint from_state(const std::vector<double>& y, int n) {
  ContactPoint c;
  c.x.assign(y.begin(), y.begin() + n);
  c.p.assign(y.begin() + n, y.begin() + 2 * n);
  c.u = y[2 * n];
  return c;
}

/// Cauchy data: surface x^i = X^i(s), value mu(s), Newton guess for du.
/// Expressions use the parameter symbols returned by parameters(n - 1).
struct CauchyData {
  std::vector<Expr> surface;
  Expr value;
  std::vector<Expr> guess;

  static std::vector<std::string> parameter_names(int d) {
    if (d == 1) return {"s"};
    std::vector<std::string> out;
    for (int a = 0; a < d; ++a) out.push_back("s" + std::to_string(a + 1));
    return out;
  }
  static std::vector<VarRef> parameters(int d) {
    std::vector<VarRef> out;
    for (const auto& n : parameter_names(d)) out.push_back(VarRef::aux(n));
    return out;
  }
};

struct StripSample {
  std::vector<double> s;
  ContactPoint point;
};

/// Initial manifold N: points over the Cauchy data on F = 0 and tangent to it.
struct Strip {
  int n = 0;
  std::vector<StripSample> samples;
  std::vector<std::string> warnings;
};

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-12;
};

struct StripOptions {
  NewtonOptions newton;
  bool drop_characteristic = true;   // otherwise a singular Newton system throws
  double transversality_tol = 1e-6;  // radians
  double characteristic_tol = 1e-10; // relative pivot size marking a singular system
};

namespace detail {
// Solves A x = b in place (row-major n x n); false if a pivot falls below
// rel_tol times the largest entry.
inline bool solve_dense(std::vector<double> a, std::vector<double>& b, int n, double rel_tol = 1e-12) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (int c = 0; c < n; ++c) {
    int best = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[best * n + c])) best = r;
    if (std::abs(a[best * n + c]) <= rel_tol * scale) return false;
    if (best != c) {
      for (int j = 0; j < n; ++j) std::swap(a[best * n + j], a[c * n + j]);
      std::swap(b[best], b[c]);
    }
    for (int r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / a[c * n + c];
      for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
      b[r] -= f * b[c];
    }
  }
  for (int c = n - 1; c >= 0; --c) {
    for (int j = c + 1; j < n; ++j) b[c] -= a[c * n + j] * b[j];
    b[c] /= a[c * n + c];
  }
  return true;
}

inline std::string format_point(const std::vector<double>& s) {
  std::ostringstream os;
  os << "s=(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << ")";
  return os.str();
}

// Sine of the angle between y and the span of the tangents.
inline double angle_sine(std::vector<double> y, std::vector<std::vector<double>> tangents) {
  double ny = 0.0;
  for (double v : y) ny += v * v;
  if (ny == 0.0) return 0.0;
  std::vector<std::vector<double>> basis;
  for (auto& t : tangents) {
    for (const auto& q : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) d += t[i] * q[i];
      for (std::size_t i = 0; i < t.size(); ++i) t[i] -= d * q[i];
    }
    double nt = 0.0;
    for (double v : t) nt += v * v;
    if (nt == 0.0) continue;
    for (double& v : t) v /= std::sqrt(nt);
    basis.push_back(t);
  }
  for (const auto& q : basis) {
    double d = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) d += y[i] * q[i];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= d * q[i];
  }
  double r = 0.0;
  for (double v : y) r += v * v;
  return std::sqrt(r / ny);
}
}  // namespace detail

/// Solves, at each parameter sample, F = 0 together with the n-1 tangency
/// conditions dmu/ds^a = p_i dX^i/ds^a for the gradient p, by Newton from the
/// supplied guess.
inline Strip build_strip(const ScalarPde& pde, const CauchyData& data, const std::vector<std::vector<double>>& s_samples,
                         const StripOptions& opts = {}) {
  const int n = pde.n;
  const int d = n - 1;
  if (static_cast<int>(data.surface.size()) != n) throw PreconditionError("surface needs one expression per coordinate");
  if (static_cast<int>(data.guess.size()) != n) throw PreconditionError("guess needs one value per gradient component");
  auto svars = CauchyData::parameters(d);

  std::vector<Expr> g;
  for (int a = 0; a < d; ++a) {
    Expr t = diff(data.value, svars[a]);
    for (int i = 0; i < n; ++i) t = t - Expr(jet1::p(i)) * diff(data.surface[i], svars[a]);
    g.push_back(t);
  }
  Substitution on_surface{{jet1::u(), data.value}};
  for (int i = 0; i < n; ++i) on_surface.emplace(jet1::x(i), data.surface[i]);
  g.push_back(substitute(pde.F, on_surface));

  std::vector<VarRef> slots = svars;
  for (int i = 0; i < n; ++i) slots.push_back(jet1::p(i));
  std::vector<Expr> jac, dgds;
  for (const auto& gr : g) {
    for (int i = 0; i < n; ++i) jac.push_back(diff(gr, jet1::p(i)));
    for (int a = 0; a < d; ++a) dgds.push_back(diff(gr, svars[a]));
  }
  std::vector<Expr> base = data.surface;
  base.push_back(data.value);
  std::vector<Expr> dbase;  // d(X, mu)/ds^a, row-major by a
  for (int a = 0; a < d; ++a)
    for (const auto& e : base) dbase.push_back(diff(e, svars[a]));
  Naming names = pde.names;
  ProgramSet g_prog(g, slots, pde.params, names), j_prog(jac, slots, pde.params, names),
      dgds_prog(dgds, slots, pde.params, names), base_prog(base, slots, pde.params, names),
      dbase_prog(dbase, slots, pde.params, names), guess_prog(data.guess, slots, pde.params, names);
  VectorField yf = char_field(pde.F, n);
  ProgramSet yf_prog(yf.comps, jet1_slots(n), pde.params, names);

  Strip strip;
  strip.n = n;
  for (const auto& s : s_samples) {
    if (static_cast<int>(s.size()) != d) throw PreconditionError("parameter sample has wrong dimension");
    std::vector<double> z(s);
    z.resize(d + n, 0.0);
    std::vector<double> p(n);
    guess_prog(z, p);
    std::vector<double> vals(n + 1);
    std::copy(p.begin(), p.end(), z.begin() + d);
    base_prog(z, vals);
    const double scale = std::max(1.0, std::abs(vals[n]));

    std::vector<double> res(n), jm(n * n);
    bool converged = false, singular = false;
    double last = 0.0;
    for (int it = 0; it <= opts.newton.max_iter; ++it) {
      std::copy(p.begin(), p.end(), z.begin() + d);
      g_prog(z, res);
      last = 0.0;
      for (double r : res) last = std::max(last, std::abs(r));
      if (!std::isfinite(last)) break;
      if (last <= opts.newton.tol * scale) {
        converged = true;
        break;
      }
      if (it == opts.newton.max_iter) break;
      j_prog(z, jm);
      if (!detail::solve_dense(jm, res, n)) {
        singular = true;
        break;
      }
      for (int i = 0; i < n; ++i) p[i] -= res[i];
    }
    if (converged) {
      // A singular system at the solution leaves p undetermined there.
      j_prog(z, jm);
      std::vector<double> probe(n, 1.0);
      singular = !detail::solve_dense(jm, probe, n, opts.characteristic_tol);
    }
    if (singular) {
      std::string msg = "Cauchy data characteristic at " + detail::format_point(s) + " (singular Newton system)";
      if (!opts.drop_characteristic) throw NumericError(msg);
      strip.warnings.push_back("dropped sample: " + msg);
      continue;
    }
    if (!converged) {
      std::ostringstream os;
      os << "strip Newton did not converge at " << detail::format_point(s) << ", residual " << last;
      throw NumericError(os.str());
    }
    StripSample sample;
    sample.s = s;
    sample.point.x.assign(vals.begin(), vals.begin() + n);
    sample.point.u = vals[n];
    sample.point.p = p;

    // Transversality of Y_F to N, with dp/ds from implicit differentiation.
    std::vector<double> y = to_state(sample.point), yv(2 * n + 1);
    yf_prog(y, yv);
    std::vector<std::vector<double>> tangents;
    if (d > 0) {
      j_prog(z, jm);
      std::vector<double> dg(dgds.size()), db(dbase.size());
      dgds_prog(z, dg);
      dbase_prog(z, db);
      for (int a = 0; a < d; ++a) {
        std::vector<double> rhs(n);
        for (int r = 0; r < n; ++r) rhs[r] = -dg[r * d + a];
        if (!detail::solve_dense(jm, rhs, n)) continue;
        std::vector<double> t(2 * n + 1);
        for (int i = 0; i < n; ++i) {
          t[i] = db[a * (n + 1) + i];
          t[n + i] = rhs[i];
        }
        t[2 * n] = db[a * (n + 1) + n];
        tangents.push_back(std::move(t));
      }
    }
    if (detail::angle_sine(yv, tangents) < std::sin(opts.transversality_tol))
      strip.warnings.push_back("characteristic field nearly tangent to the initial strip at " +
                               detail::format_point(s));
    strip.samples.push_back(std::move(sample));
  }
  return strip;
}

/// F_{u_i} z_{x^i} at each strip point; zero flags a characteristic sample.
inline std::vector<double> noncharacteristic_check(const ScalarPde& pde, const Strip& strip, const Expr& z) {
  const int n = pde.n;
  Expr value(0.0);
  for (int i = 0; i < n; ++i) value = value + diff(pde.F, jet1::p(i)) * diff(z, jet1::x(i));
  Program prog = Program::compile(value, jet1_slots(n), pde.params, pde.names);
  std::vector<double> out;
  for (const auto& s : strip.samples) out.push_back(prog(to_state(s.point)));
  return out;
}

struct Trajectory {
  std::vector<double> s;
  std::vector<ContactPoint> nodes;  // node k at t = k h
  bool truncated = false;
};

/// Family of characteristic curves indexed by (strip sample, step).
struct SolutionSheet {
  int n = 0;
  double h = 0.0;
  std::string method = "RK4";
  std::vector<Trajectory> trajectories;

  double t(int k) const { return k * h; }
};

inline SolutionSheet integrate_characteristics(const ScalarPde& pde, const Strip& strip, double h, int steps) {
  if (!(h > 0.0)) throw PreconditionError("step size must be positive");
  if (steps < 1) throw PreconditionError("need at least one step");
  const int n = pde.n;
  VectorField yf = char_field(pde.F, n);
  ProgramSet rhs(yf.comps, jet1_slots(n), pde.params, pde.names);
  auto f = [&](const std::vector<double>& y, std::vector<double>& dy) { rhs(y, dy); };

  SolutionSheet sheet;
  sheet.n = n;
  sheet.h = h;
  for (const auto& sample : strip.samples) {
    Trajectory tr;
    tr.s = sample.s;
    std::vector<double> y = to_state(sample.point);
    tr.nodes.reserve(steps + 1);
    tr.nodes.push_back(sample.point);
    for (int k = 0; k < steps; ++k) {
      rk4_step(y, h, f);
      if (blown_up(y)) {
        tr.truncated = true;
        break;
      }
      tr.nodes.push_back(from_state(y, n));
    }
    sheet.trajectories.push_back(std::move(tr));
  }
  return sheet;
}

/// Largest |F| over all sheet nodes; F is a first integral of the flow.
inline double first_integral_drift(const ScalarPde& pde, const SolutionSheet& sheet) {
  Program prog = Program::compile(pde.F, jet1_slots(pde.n), pde.params, pde.names);
  double worst = 0.0;
  for (const auto& tr : sheet.trajectories)
    for (const auto& node : tr.nodes) worst = std::max(worst, std::abs(prog(to_state(node))));
  return worst;
}

struct ContactResidual {
  double max_step = 0.0;         // largest single-step residual
  double max_accumulated = 0.0;  // largest |running sum| along a trajectory
};

/// Per-step residual du - integral of p.dx/dt over the step, with the
/// integral taken by the endpoint-corrected trapezoid rule (fourth order),
/// so a step of the exact flow leaves O(h^5).
inline ContactResidual contact_residual(const ScalarPde& pde, const SolutionSheet& sheet) {
  const int n = pde.n;
  VectorField yf = char_field(pde.F, n);
  Expr g(0.0);
  for (int i = 0; i < n; ++i) g = g + Expr(jet1::p(i)) * yf.dx(i);
  Expr gdot = yf.apply(g);
  auto slots = jet1_slots(n);
  Program gp = Program::compile(g, slots, pde.params, pde.names);
  Program gdp = Program::compile(gdot, slots, pde.params, pde.names);
  const double h = sheet.h;
  ContactResidual out;
  for (const auto& tr : sheet.trajectories) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < tr.nodes.size(); ++k) {
      auto y0 = to_state(tr.nodes[k]);
      auto y1 = to_state(tr.nodes[k + 1]);
      double quad = 0.5 * h * (gp(y0) + gp(y1)) + h * h / 12.0 * (gdp(y0) - gdp(y1));
      double r = tr.nodes[k + 1].u - tr.nodes[k].u - quad;
      sum += r;
      out.max_step = std::max(out.max_step, std::abs(r));
      out.max_accumulated = std::max(out.max_accumulated, std::abs(sum));
    }
  }
  return out;
}

struct Branch {
  double u = 0.0;
  std::vector<double> p;
  std::vector<double> s;
  double t = 0.0;
};

struct EvalResult {
  std::vector<Branch> branches;  // one per sheet of the solution over the query
  bool out_of_domain = false;
};

struct EvalOptions {
  double containment_tol = 1e-9;  // slack on cell membership, in cell coordinates
  int newton_iter = 30;
  double dedupe_tol = 1e-7;  // branches closer than this in (s, t) are merged
};

namespace detail {
// Lagrange basis values and first derivatives at x over nodes.
inline void lagrange(const std::vector<double>& nodes, double x, std::vector<double>& w, std::vector<double>& dw) {
  const std::size_t m = nodes.size();
  w.assign(m, 0.0);
  dw.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double denom = 1.0, val = 1.0, der = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j) continue;
      denom *= nodes[j] - nodes[i];
      double prod = 1.0;
      for (std::size_t l = 0; l < m; ++l)
        if (l != j && l != i) prod *= x - nodes[l];
      der += prod;
      val *= x - nodes[i];
    }
    w[j] = val / denom;
    dw[j] = der / denom;
  }
}

inline std::vector<double> node_fields(const ContactPoint& c) {
  std::vector<double> f(c.x);
  f.push_back(c.u);
  f.insert(f.end(), c.p.begin(), c.p.end());
  return f;
}

inline int stencil_start(int center, int count, int size) {
  int start = center - (size / 2 - 1);
  return std::clamp(start, 0, std::max(0, count - size));
}
}  // namespace detail

/// All branches of the solution over x_query. Cells of the (s, t) grid whose
/// footprint contains the query seed a Newton solve of x(s, t) = x_query on
/// the piecewise-cubic interpolant of the sheet.
inline EvalResult eval_solution(const SolutionSheet& sheet, const std::vector<double>& x_query,
                                const EvalOptions& opts = {}) {
  const int n = sheet.n;
  if (sheet.trajectories.empty()) throw PreconditionError("empty solution sheet");
  if (static_cast<int>(x_query.size()) != n) throw PreconditionError("query has wrong dimension");
  if (n > 2) throw PreconditionError("eval_solution supports n <= 2");
  const double h = sheet.h;
  EvalResult result;

  auto add_branch = [&](Branch b) {
    for (const auto& o : result.branches) {
      bool same = std::abs(o.t - b.t) <= opts.dedupe_tol * (1.0 + std::abs(b.t));
      for (std::size_t a = 0; a < b.s.size() && same; ++a)
        same = std::abs(o.s[a] - b.s[a]) <= opts.dedupe_tol * (1.0 + std::abs(b.s[a]));
      if (same) return;
    }
    result.branches.push_back(std::move(b));
  };
  auto make_branch = [&](const std::vector<double>& f, std::vector<double> s, double t) {
    Branch b;
    b.u = f[n];
    b.p.assign(f.begin() + n + 1, f.end());
    b.s = std::move(s);
    b.t = t;
    return b;
  };

  if (n == 1) {
    for (const auto& tr : sheet.trajectories) {
      const int count = static_cast<int>(tr.nodes.size());
      for (int k = 0; k + 1 < count; ++k) {
        double x0 = tr.nodes[k].x[0], x1 = tr.nodes[k + 1].x[0];
        double lo = std::min(x0, x1), hi = std::max(x0, x1), slack = opts.containment_tol * std::max(1e-300, hi - lo);
        if (x_query[0] < lo - slack || x_query[0] > hi + slack) continue;
        int size = std::min(4, count);
        int start = detail::stencil_start(k, count, size);
        std::vector<double> tn(size);
        for (int i = 0; i < size; ++i) tn[i] = (start + i) * h;
        double t = x1 != x0 ? (k + (x_query[0] - x0) / (x1 - x0)) * h : k * h;
        std::vector<double> w, dw, f;
        for (int it = 0; it < opts.newton_iter; ++it) {
          detail::lagrange(tn, t, w, dw);
          double x = 0.0, dx = 0.0;
          for (int i = 0; i < size; ++i) {
            x += w[i] * tr.nodes[start + i].x[0];
            dx += dw[i] * tr.nodes[start + i].x[0];
          }
          if (dx == 0.0) break;
          double step = (x - x_query[0]) / dx;
          t -= step;
          if (std::abs(step) <= 1e-15 * (1.0 + std::abs(t))) break;
        }
        if (t < -opts.containment_tol * h || t > (count - 1 + opts.containment_tol) * h) continue;
        detail::lagrange(tn, t, w, dw);
        f.assign(2 * n + 1, 0.0);
        for (int i = 0; i < size; ++i) {
          auto nf = detail::node_fields(tr.nodes[start + i]);
          for (std::size_t c = 0; c < f.size(); ++c) f[c] += w[i] * nf[c];
        }
        add_branch(make_branch(f, tr.s, t));
      }
    }
    result.out_of_domain = result.branches.empty();
    return result;
  }

  // n == 2: order trajectories by their parameter.
  std::vector<const Trajectory*> trs;
  for (const auto& tr : sheet.trajectories)
    if (!tr.nodes.empty()) trs.push_back(&tr);
  std::sort(trs.begin(), trs.end(), [](const Trajectory* a, const Trajectory* b) { return a->s[0] < b->s[0]; });
  const int J = static_cast<int>(trs.size());
  if (J < 2) throw PreconditionError("need at least two trajectories to evaluate a 2D sheet");

  auto x_of = [&](int j, int k) -> const std::vector<double>& { return trs[j]->nodes[k].x; };
  for (int j = 0; j + 1 < J; ++j) {
    const int kcount = static_cast<int>(std::min(trs[j]->nodes.size(), trs[j + 1]->nodes.size()));
    for (int k = 0; k + 1 < kcount; ++k) {
      const auto &a = x_of(j, k), &b = x_of(j + 1, k), &c = x_of(j + 1, k + 1), &d = x_of(j, k + 1);
      bool inside_box = true;
      for (int i = 0; i < 2 && inside_box; ++i) {
        double lo = std::min({a[i], b[i], c[i], d[i]}), hi = std::max({a[i], b[i], c[i], d[i]});
        double slack = opts.containment_tol * std::max(hi - lo, 1e-300) + 1e-14 * std::abs(x_query[i]);
        inside_box = x_query[i] >= lo - slack && x_query[i] <= hi + slack;
      }
      if (!inside_box) continue;
      // Inverse of the bilinear cell map by Newton.
      double al = 0.5, be = 0.5, last_step = 1.0;
      for (int it = 0; it < 30 && last_step > 1e-13; ++it) {
        double px[2], da[2], db[2];
        for (int i = 0; i < 2; ++i) {
          px[i] = a[i] * (1 - al) * (1 - be) + b[i] * al * (1 - be) + c[i] * al * be + d[i] * (1 - al) * be;
          da[i] = (b[i] - a[i]) * (1 - be) + (c[i] - d[i]) * be;
          db[i] = (d[i] - a[i]) * (1 - al) + (c[i] - b[i]) * al;
        }
        double det = da[0] * db[1] - da[1] * db[0];
        if (det == 0.0) break;
        double r0 = px[0] - x_query[0], r1 = px[1] - x_query[1];
        double dal = (r0 * db[1] - r1 * db[0]) / det;
        double dbe = (da[0] * r1 - da[1] * r0) / det;
        al -= dal;
        be -= dbe;
        last_step = std::abs(dal) + std::abs(dbe);
      }
      const double slack = std::max(opts.containment_tol, 1e-12);
      if (!(last_step < 1e-9) || al < -slack || al > 1 + slack || be < -slack || be > 1 + slack) continue;

      // Cubic tensor interpolant over a 4x4 stencil around the cell.
      int ssize = std::min(4, J);
      int sstart = detail::stencil_start(j, J, ssize);
      int kmax = kcount;
      for (int jj = sstart; jj < sstart + ssize; ++jj)
        kmax = std::min(kmax, static_cast<int>(trs[jj]->nodes.size()));
      if (kmax < 2) continue;
      int tsize = std::min(4, kmax);
      int tstart = detail::stencil_start(k, kmax, tsize);
      std::vector<double> sn(ssize), tn(tsize);
      for (int i = 0; i < ssize; ++i) sn[i] = trs[sstart + i]->s[0];
      for (int i = 0; i < tsize; ++i) tn[i] = (tstart + i) * h;
      double s = trs[j]->s[0] + al * (trs[j + 1]->s[0] - trs[j]->s[0]);
      double t = (k + be) * h;
      std::vector<double> ws, dws, wt, dwt;
      auto interp = [&](std::vector<double>& f, double dfs[2], double dft[2]) {
        detail::lagrange(sn, s, ws, dws);
        detail::lagrange(tn, t, wt, dwt);
        f.assign(5, 0.0);
        dfs[0] = dfs[1] = dft[0] = dft[1] = 0.0;
        for (int a2 = 0; a2 < ssize; ++a2)
          for (int b2 = 0; b2 < tsize; ++b2) {
            const auto& node = trs[sstart + a2]->nodes[tstart + b2];
            auto nf = detail::node_fields(node);
            double w = ws[a2] * wt[b2];
            for (int q = 0; q < 5; ++q) f[q] += w * nf[q];
            for (int q = 0; q < 2; ++q) {
              dfs[q] += dws[a2] * wt[b2] * nf[q];
              dft[q] += ws[a2] * dwt[b2] * nf[q];
            }
          }
      };
      std::vector<double> f;
      double dfs[2], dft[2];
      for (int it = 0; it < opts.newton_iter; ++it) {
        interp(f, dfs, dft);
        double r0 = f[0] - x_query[0], r1 = f[1] - x_query[1];
        double det = dfs[0] * dft[1] - dfs[1] * dft[0];
        if (det == 0.0) break;
        double ds = (r0 * dft[1] - r1 * dft[0]) / det;
        double dt = (dfs[0] * r1 - dfs[1] * r0) / det;
        s -= ds;
        t -= dt;
        if (std::abs(ds) <= 1e-14 * (1.0 + std::abs(s)) && std::abs(dt) <= 1e-14 * (1.0 + std::abs(t))) break;
      }
      interp(f, dfs, dft);
      double resid = std::hypot(f[0] - x_query[0], f[1] - x_query[1]);
      double xscale = 1.0 + std::hypot(x_query[0], x_query[1]);
      if (!(resid <= 1e-10 * xscale)) continue;
      double s_lo = trs.front()->s[0], s_hi = trs.back()->s[0];
      double s_slack = slack * (s_hi - s_lo);
      if (s < s_lo - s_slack || s > s_hi + s_slack || t < -slack * h || t > (kcount - 1 + slack) * h) continue;
      add_branch(make_branch(f, {s}, t));
    }
  }
  result.out_of_domain = result.branches.empty();
  return result;
}

}  // namespace charkit
