#pragma once

// Hamilton-Jacobi equations H(x, du) = E: the Hamiltonian field on T*M, its
// flow, Lagrangian sheets swept from a seed on H = E, and the lift back to a
// first-order PDE on J^1.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "charkit/charsolve.hpp"
#include "charkit/contact.hpp"
#include "charkit/error.hpp"
#include "charkit/expr.hpp"
#include "charkit/ode.hpp"
#include "charkit/poly.hpp"

namespace charkit {

/// H in x^i (Indep) and p_i (first jets of u), with the level E.
struct HamiltonianSystem {
  int n = 0;
  Expr H;
  double E = 0.0;
  Env params;
  Naming names;

  HamiltonianSystem() = default;
  HamiltonianSystem(int dim, Expr h, double energy = 0.0, Env bindings = {}, Naming nm = {})
      : n(dim), H(std::move(h)), E(energy), params(std::move(bindings)),
        names(nm.indep.empty() ? jet1::naming(dim) : std::move(nm)) {
    if (n < 1) throw PreconditionError("Hamiltonian needs at least one coordinate");
    jet1::require(H, n, "Hamiltonian");
    if (depends_on(H, jet1::u())) throw PreconditionError("Hamiltonian must not depend on u");
  }
};

struct PhasePoint {
  std::vector<double> x;
  std::vector<double> p;
};

/// Phase-space coordinates in state order (x^1..x^n, p_1..p_n).
inline std::vector<VarRef> phase_slots(int n) {
  std::vector<VarRef> slots;
  for (int i = 0; i < n; ++i) slots.push_back(jet1::x(i));
  for (int i = 0; i < n; ++i) slots.push_back(jet1::p(i));
  return slots;
}

/// dx^i/dt = H_{p_i}, dp_i/dt = -H_{x^i}.
inline std::vector<Expr> hamiltonian_field(const HamiltonianSystem& sys) {
  std::vector<Expr> out;
  for (int i = 0; i < sys.n; ++i) out.push_back(diff(sys.H, jet1::p(i)));
  for (int i = 0; i < sys.n; ++i) out.push_back(-diff(sys.H, jet1::x(i)));
  return out;
}

struct PhaseTrajectory {
  std::vector<PhasePoint> nodes;  // node k at t = k h
  bool truncated = false;
};

namespace detail {
inline std::vector<double> phase_state(const PhasePoint& q) {
  std::vector<double> y(q.x);
  y.insert(y.end(), q.p.begin(), q.p.end());
  return y;
}

inline PhasePoint phase_point(const std::vector<double>& y, int n) {
  return {std::vector<double>(y.begin(), y.begin() + n), std::vector<double>(y.begin() + n, y.end())};
}

inline void check_point(const PhasePoint& q, int n) {
  if (static_cast<int>(q.x.size()) != n || static_cast<int>(q.p.size()) != n)
    throw PreconditionError("phase point has wrong dimension");
}
}  // namespace detail

inline std::vector<PhaseTrajectory> flow(const HamiltonianSystem& sys, const std::vector<PhasePoint>& points, double h,
                                         int steps) {
  if (!(h > 0.0)) throw PreconditionError("step size must be positive");
  if (steps < 1) throw PreconditionError("need at least one step");
  ProgramSet rhs(hamiltonian_field(sys), phase_slots(sys.n), sys.params, sys.names);
  auto f = [&](const std::vector<double>& y, std::vector<double>& dy) { rhs(y, dy); };
  std::vector<PhaseTrajectory> out;
  for (const auto& start : points) {
    detail::check_point(start, sys.n);
    PhaseTrajectory tr;
    tr.nodes.reserve(steps + 1);
    tr.nodes.push_back(start);
    std::vector<double> y = detail::phase_state(start);
    for (int k = 0; k < steps; ++k) {
      rk4_step(y, h, f);
      if (blown_up(y)) {
        tr.truncated = true;
        break;
      }
      tr.nodes.push_back(detail::phase_point(y, sys.n));
    }
    out.push_back(std::move(tr));
  }
  return out;
}

inline double hamiltonian_value(const HamiltonianSystem& sys, const PhasePoint& q) {
  return Program::compile(sys.H, phase_slots(sys.n), sys.params, sys.names)(detail::phase_state(q));
}

/// Flowed seed: trajectory j starts at seed sample j with parameter s[j].
struct LagrangianSheet {
  int n = 0;
  double h = 0.0;
  std::vector<double> s;
  std::vector<PhaseTrajectory> trajectories;
  std::vector<std::string> warnings;
};

struct SweepOptions {
  double tol = 1e-8;                 // allowed |H - E| on the seed
  double transversality_tol = 1e-6;  // radians
};

/// Largest |H - E| over all sheet nodes.
inline double energy_drift(const HamiltonianSystem& sys, const std::vector<PhaseTrajectory>& trajectories) {
  Program hp = Program::compile(sys.H, phase_slots(sys.n), sys.params, sys.names);
  double worst = 0.0;
  for (const auto& tr : trajectories)
    for (const auto& q : tr.nodes) worst = std::max(worst, std::abs(hp(detail::phase_state(q)) - sys.E));
  return worst;
}

/// Flows an (n-1)-parameter seed on H = E. The seed samples are ordered by
/// their parameter values s (empty for n = 1, where the seed is one point).
inline LagrangianSheet sweep_lagrangian(const HamiltonianSystem& sys, const std::vector<PhasePoint>& seed,
                                        const std::vector<double>& s, double h, int steps,
                                        const SweepOptions& opts = {}) {
  if (sys.n > 2) throw PreconditionError("sweep_lagrangian supports n <= 2");
  if (seed.empty()) throw PreconditionError("empty seed");
  if (sys.n == 1 && seed.size() != 1) throw PreconditionError("a seed for n = 1 is a single point");
  if (sys.n == 2 && s.size() != seed.size()) throw PreconditionError("one parameter value per seed sample");
  Program hp = Program::compile(sys.H, phase_slots(sys.n), sys.params, sys.names);
  for (std::size_t j = 0; j < seed.size(); ++j) {
    detail::check_point(seed[j], sys.n);
    double off = std::abs(hp(detail::phase_state(seed[j])) - sys.E);
    if (off > opts.tol) {
      std::ostringstream os;
      os << "seed sample " << j << " is off the energy surface: |H - E| = " << off;
      throw PreconditionError(os.str());
    }
  }
  // A seed curve in a 4-dimensional symplectic space is always isotropic;
  // only transversality to X_H can fail.
  LagrangianSheet sheet;
  sheet.n = sys.n;
  sheet.h = h;
  sheet.s = s;
  if (sys.n == 2 && seed.size() >= 2) {
    ProgramSet field(hamiltonian_field(sys), phase_slots(sys.n), sys.params, sys.names);
    for (std::size_t j = 0; j < seed.size(); ++j) {
      std::size_t a = j == 0 ? 0 : j - 1, b = j + 1 == seed.size() ? j : j + 1;
      auto ya = detail::phase_state(seed[a]), yb = detail::phase_state(seed[b]);
      std::vector<double> tangent(4), xh(4);
      for (int c = 0; c < 4; ++c) tangent[c] = (yb[c] - ya[c]) / (s[b] - s[a]);
      field(detail::phase_state(seed[j]), xh);
      if (detail::angle_sine(xh, {tangent}) < std::sin(opts.transversality_tol)) {
        std::ostringstream os;
        os << "Hamiltonian field nearly tangent to the seed at s=" << s[j];
        sheet.warnings.push_back(os.str());
      }
    }
  }
  sheet.trajectories = flow(sys, seed, h, steps);
  return sheet;
}

inline double symplectic_pairing(const std::vector<double>& v, const std::vector<double>& w, int n) {
  double out = 0.0;
  for (int i = 0; i < n; ++i) out += v[n + i] * w[i] - w[n + i] * v[i];
  return out;
}

namespace detail {
// d/dz of samples y(z_0..z_{m-1}) at index i: central inside, three-point
// one-sided at the edges (two-point if only two samples).
inline std::vector<double> fd_tangent(const std::vector<std::vector<double>>& y, const std::vector<double>& z,
                                      int i) {
  const int m = static_cast<int>(y.size());
  const std::size_t d = y[0].size();
  std::vector<double> out(d);
  if (m == 2) {
    for (std::size_t c = 0; c < d; ++c) out[c] = (y[1][c] - y[0][c]) / (z[1] - z[0]);
    return out;
  }
  int a = std::clamp(i - 1, 0, m - 3);
  // Derivative of the quadratic through a, a+1, a+2, evaluated at z_i.
  double z0 = z[a], z1 = z[a + 1], z2 = z[a + 2], zi = z[i];
  double w0 = ((zi - z1) + (zi - z2)) / ((z0 - z1) * (z0 - z2));
  double w1 = ((zi - z0) + (zi - z2)) / ((z1 - z0) * (z1 - z2));
  double w2 = ((zi - z0) + (zi - z1)) / ((z2 - z0) * (z2 - z1));
  for (std::size_t c = 0; c < d; ++c) out[c] = w0 * y[a][c] + w1 * y[a + 1][c] + w2 * y[a + 2][c];
  return out;
}
}  // namespace detail

/// max |Omega(d/ds, d/dt)| over the sheet grid, with tangents by finite
/// differences (central inside, one-sided at the edges).
inline double isotropy_defect(const LagrangianSheet& sheet) {
  if (sheet.n == 1) return 0.0;
  const int J = static_cast<int>(sheet.trajectories.size());
  int K = J ? static_cast<int>(sheet.trajectories[0].nodes.size()) : 0;
  for (const auto& tr : sheet.trajectories) K = std::min(K, static_cast<int>(tr.nodes.size()));
  if (J < 2 || K < 2) throw PreconditionError("isotropy check needs at least a 2x2 grid");
  if (static_cast<int>(sheet.s.size()) != J) throw PreconditionError("one parameter value per trajectory");
  const int n = sheet.n;
  std::vector<std::vector<std::vector<double>>> grid(J);  // [j][k] -> state
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k) grid[j].push_back(detail::phase_state(sheet.trajectories[j].nodes[k]));
  std::vector<double> times(K);
  for (int k = 0; k < K; ++k) times[k] = k * sheet.h;
  double worst = 0.0;
  std::vector<std::vector<double>> column(J);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) column[j] = grid[j][k];
    for (int j = 0; j < J; ++j) {
      auto vs = detail::fd_tangent(column, sheet.s, j);
      auto vt = detail::fd_tangent(grid[j], times, k);
      worst = std::max(worst, std::abs(symplectic_pairing(vs, vt, n)));
    }
  }
  return worst;
}

/// F(x, u, p) = H(x, p) - E on J^1.
struct LiftedPde {
  ScalarPde pde;
  bool degenerate = false;  // F vanishes identically
};

inline LiftedPde lift_to_jet(const HamiltonianSystem& sys) {
  LiftedPde out;
  Expr f = sys.H - Expr(sys.E);
  out.pde = ScalarPde(f, sys.n, sys.params, sys.names);
  out.degenerate = poly_equal(f, Expr(0.0));
  return out;
}

/// Reads a first-order PDE that does not involve u as a Hamiltonian at level 0.
inline HamiltonianSystem hamiltonian_from_pde(const ScalarPde& pde) {
  return HamiltonianSystem(pde.n, pde.F, 0.0, pde.params, pde.names);
}

}  // namespace charkit
