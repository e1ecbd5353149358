#pragma once

// Real-valued evaluation of expressions compiled to a flat stack program, and
// a fixed-step classical RK4 integrator.

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "charkit/error.hpp"
#include "charkit/expr.hpp"

namespace charkit {

/// An expression compiled against an ordered list of slot variables. Other
/// symbols must be bound to real constants at compile time.
class Program {
 public:
  Program() = default;

  static Program compile(const Expr& e, const std::vector<VarRef>& slots, const Env& constants = {},
                         const Naming& names = {}) {
    Program p;
    int depth = 0;
    p.emit(e, slots, constants, names, depth);
    return p;
  }

  double operator()(std::span<const double> x) const {
    std::array<double, 64> small;
    std::vector<double> big;
    double* stack = small.data();
    if (max_depth_ > static_cast<int>(small.size())) {
      big.resize(max_depth_);
      stack = big.data();
    }
    int top = 0;
    for (const auto& ins : code_) {
      switch (ins.op) {
        case Code::Push: stack[top++] = ins.value; break;
        case Code::Load: stack[top++] = x[ins.arg]; break;
        case Code::Neg: stack[top - 1] = -stack[top - 1]; break;
        case Code::Add: --top; stack[top - 1] += stack[top]; break;
        case Code::Sub: --top; stack[top - 1] -= stack[top]; break;
        case Code::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Code::Div: --top; stack[top - 1] /= stack[top]; break;
        case Code::Pow: {
          double b = stack[top - 1], r = 1.0;
          for (int n = ins.arg; n > 0; n >>= 1) {
            if (n & 1) r *= b;
            b *= b;
          }
          stack[top - 1] = r;
          break;
        }
        case Code::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
        case Code::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
        case Code::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
        case Code::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      }
    }
    return top ? stack[0] : 0.0;
  }

 private:
  enum class Code { Push, Load, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };
  struct Instr {
    Code op;
    double value = 0.0;
    int arg = 0;
  };

  void push(Code op, int& depth, int delta, double value = 0.0, int arg = 0) {
    code_.push_back({op, value, arg});
    depth += delta;
    max_depth_ = std::max(max_depth_, depth);
  }

  static double real_only(const Complex& c, const char* what) {
    if (c.imag() != 0.0) throw PreconditionError(std::string("complex ") + what + " in a real computation");
    return c.real();
  }

  void emit(const Expr& e, const std::vector<VarRef>& slots, const Env& constants, const Naming& names,
            int& depth) {
    switch (e.op()) {
      case Op::Const: push(Code::Push, depth, 1, real_only(e.value(), "constant")); return;
      case Op::Var: {
        for (std::size_t i = 0; i < slots.size(); ++i)
          if (slots[i] == e.var()) return push(Code::Load, depth, 1, 0.0, static_cast<int>(i));
        auto it = constants.find(e.var());
        if (it == constants.end())
          throw UnboundError("unbound variable " + names.to_string(e.var()), {names.to_string(e.var())});
        push(Code::Push, depth, 1, real_only(it->second, "binding"));
        return;
      }
      case Op::Neg: emit(e.lhs(), slots, constants, names, depth); push(Code::Neg, depth, 0); return;
      case Op::Pow: emit(e.lhs(), slots, constants, names, depth); push(Code::Pow, depth, 0, 0.0, e.exponent()); return;
      case Op::Func: {
        emit(e.lhs(), slots, constants, names, depth);
        static constexpr Code codes[] = {Code::Sin, Code::Cos, Code::Exp, Code::Sqrt};
        push(codes[static_cast<int>(e.fn())], depth, 0);
        return;
      }
      default: {
        emit(e.lhs(), slots, constants, names, depth);
        emit(e.rhs(), slots, constants, names, depth);
        Code c = e.op() == Op::Add ? Code::Add : e.op() == Op::Sub ? Code::Sub : e.op() == Op::Mul ? Code::Mul : Code::Div;
        push(c, depth, -1);
      }
    }
  }

  std::vector<Instr> code_;
  int max_depth_ = 0;
};

/// Several programs over the same slots, evaluated together.
class ProgramSet {
 public:
  ProgramSet() = default;
  ProgramSet(const std::vector<Expr>& exprs, const std::vector<VarRef>& slots, const Env& constants = {},
             const Naming& names = {}) {
    for (const auto& e : exprs) programs_.push_back(Program::compile(e, slots, constants, names));
  }

  std::size_t size() const { return programs_.size(); }
  const Program& operator[](std::size_t i) const { return programs_[i]; }

  void operator()(std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < programs_.size(); ++i) out[i] = programs_[i](x);
  }

 private:
  std::vector<Program> programs_;
};

/// One classical RK4 step of the autonomous system y' = f(y).
template <class Rhs>
void rk4_step(std::vector<double>& y, double h, const Rhs& f) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  f(y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  f(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  f(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  f(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Integration stops once a component exceeds this magnitude or turns non-finite.
inline constexpr double kOverflowGuard = 1e12;

inline bool blown_up(const std::vector<double>& y) {
  for (double v : y)
    if (!std::isfinite(v) || std::abs(v) > kOverflowGuard) return true;
  return false;
}

}  // namespace charkit
