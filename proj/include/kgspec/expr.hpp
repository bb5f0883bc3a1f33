// SPDX-License-Identifier: Apache-2.0
//
// Scalar fields on the torus. A field is either a closed-form expression in the
// coordinates or a trigonometric interpolant of grid samples. Both evaluate on
// plain doubles and on Jets, so gradients and Hessians of the metric data come
// out of the same definition that feeds the discretization.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>
#include "kgspec/errors.hpp"
#include "kgspec/jet.hpp"

namespace kgspec
{

class Expr
{
public:
  // Maps an identifier to a coordinate index, or -1 if it is not a coordinate.
  using VarLookup = std::function<int(std::string_view)>;

  Expr() : code_{Instr{Op::Const, 0, 0.0}}, text_("0") {}

  static Expr parse(std::string_view text, const VarLookup &vars);
  static Expr constant(double c);

  // Coordinate names x1..xd with the aliases x, y, z for the first three.
  static VarLookup standard_vars(int d);

  template <class T>
  T eval(const T *x) const;

  bool is_constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }
  double constant_value() const { return code_[0].value; }
  const std::string &text() const { return text_; }

private:
  enum class Op : unsigned char
  {
    Const,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    PowConst,
    PowInt,
    Pow,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh
  };
  struct Instr
  {
    Op op;
    int index = 0;
    double value = 0.0;
  };
  static constexpr int kMaxStack = 48;

  struct Node;
  friend struct ExprParser;
  static void emit(const Node &node, std::vector<Instr> &code, int depth, int &max_depth);

  std::vector<Instr> code_;
  std::string text_;
};

template <class T>
T powi(T base, long e)
{
  if (e < 0)
  {
    return T(1.0) / powi(base, -e);
  }
  T r(1.0);
  while (e > 0)
  {
    if (e & 1)
    {
      r = r * base;
    }
    base = base * base;
    e >>= 1;
  }
  return r;
}

template <class T>
T Expr::eval(const T *x) const
{
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tan;
  using std::tanh;
  std::array<T, kMaxStack> st;
  int sp = 0;
  for (const auto &in : code_)
  {
    switch (in.op)
    {
      case Op::Const:
        st[sp++] = T(in.value);
        break;
      case Op::Var:
        st[sp++] = x[in.index];
        break;
      case Op::Add:
        sp--;
        st[sp - 1] = st[sp - 1] + st[sp];
        break;
      case Op::Sub:
        sp--;
        st[sp - 1] = st[sp - 1] - st[sp];
        break;
      case Op::Mul:
        sp--;
        st[sp - 1] = st[sp - 1] * st[sp];
        break;
      case Op::Div:
        sp--;
        st[sp - 1] = st[sp - 1] / st[sp];
        break;
      case Op::Pow:
        sp--;
        st[sp - 1] = pow(st[sp - 1], st[sp]);
        break;
      case Op::Neg:
        st[sp - 1] = -st[sp - 1];
        break;
      case Op::PowConst:
        st[sp - 1] = pow(st[sp - 1], in.value);
        break;
      case Op::PowInt:
        st[sp - 1] = powi(st[sp - 1], static_cast<long>(in.index));
        break;
      case Op::Sin:
        st[sp - 1] = sin(st[sp - 1]);
        break;
      case Op::Cos:
        st[sp - 1] = cos(st[sp - 1]);
        break;
      case Op::Tan:
        st[sp - 1] = tan(st[sp - 1]);
        break;
      case Op::Exp:
        st[sp - 1] = exp(st[sp - 1]);
        break;
      case Op::Log:
        st[sp - 1] = log(st[sp - 1]);
        break;
      case Op::Sqrt:
        st[sp - 1] = sqrt(st[sp - 1]);
        break;
      case Op::Sinh:
        st[sp - 1] = sinh(st[sp - 1]);
        break;
      case Op::Cosh:
        st[sp - 1] = cosh(st[sp - 1]);
        break;
      case Op::Tanh:
        st[sp - 1] = tanh(st[sp - 1]);
        break;
    }
  }
  return st[0];
}

// Trigonometric interpolant of real samples on a uniform periodic tensor grid.
class TrigInterpolant
{
public:
  TrigInterpolant() = default;
  TrigInterpolant(const std::vector<int> &points, const std::vector<double> &lengths,
                  const std::vector<double> &samples);

  template <class T>
  T eval(const T *x) const
  {
    using std::cos;
    using std::sin;
    T acc(mean_);
    for (const auto &t : terms_)
    {
      T theta(0.0);
      for (std::size_t i = 0; i < t.kappa.size(); i++)
      {
        theta = theta + T(t.kappa[i]) * x[i];
      }
      acc = acc + T(t.a) * cos(theta) + T(t.b) * sin(theta);
    }
    return acc;
  }

  bool is_constant() const { return terms_.empty(); }
  double mean() const { return mean_; }

private:
  struct Term
  {
    std::vector<double> kappa;
    double a, b;
  };
  double mean_ = 0.0;
  std::vector<Term> terms_;
};

class Field
{
public:
  Field() = default;
  explicit Field(Expr e) : expr_(std::move(e)) {}
  explicit Field(TrigInterpolant t) : trig_(std::make_shared<TrigInterpolant>(std::move(t))) {}
  static Field constant(double c) { return Field(Expr::constant(c)); }

  template <class T>
  T eval(const T *x) const
  {
    return trig_ ? trig_->eval(x) : expr_.eval(x);
  }
  double operator()(const double *x) const { return eval(x); }

  bool is_constant() const { return trig_ ? trig_->is_constant() : expr_.is_constant(); }
  double constant_value() const { return trig_ ? trig_->mean() : expr_.constant_value(); }
  std::string describe() const { return trig_ ? std::string("<grid samples>") : expr_.text(); }

private:
  Expr expr_;
  std::shared_ptr<const TrigInterpolant> trig_;
};

}  // namespace kgspec
