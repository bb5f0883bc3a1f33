// SPDX-License-Identifier: Apache-2.0
//
// Second-order forward-mode jets. A Jet carries a value, a gradient and a
// Hessian with respect to up to kMax independent variables; the Hamiltonian
// code seeds 2d variables (positions and momenta) and reads off the Hessian
// needed by the variational equations.

#pragma once

#include <array>
#include <cmath>

namespace kgspec
{

struct Jet
{
  static constexpr int kMax = 6;

  double v = 0.0;
  std::array<double, kMax> g{};
  std::array<double, kMax * kMax> h{};

  Jet() = default;
  Jet(double c) : v(c) {}  // NOLINT: implicit promotion of constants is intended

  static Jet variable(double value, int index)
  {
    Jet j(value);
    j.g[index] = 1.0;
    return j;
  }

  double hess(int a, int b) const { return h[a * kMax + b]; }
};

// Chain rule for a scalar function f with f(a.v) = f0, f' = f1, f'' = f2.
inline Jet chain(const Jet &a, double f0, double f1, double f2)
{
  Jet r(f0);
  for (int i = 0; i < Jet::kMax; i++)
  {
    r.g[i] = f1 * a.g[i];
  }
  for (int i = 0; i < Jet::kMax; i++)
  {
    for (int j = 0; j < Jet::kMax; j++)
    {
      r.h[i * Jet::kMax + j] = f1 * a.h[i * Jet::kMax + j] + f2 * a.g[i] * a.g[j];
    }
  }
  return r;
}

inline Jet operator+(const Jet &a, const Jet &b)
{
  Jet r(a.v + b.v);
  for (int i = 0; i < Jet::kMax; i++)
  {
    r.g[i] = a.g[i] + b.g[i];
  }
  for (int i = 0; i < Jet::kMax * Jet::kMax; i++)
  {
    r.h[i] = a.h[i] + b.h[i];
  }
  return r;
}

inline Jet operator-(const Jet &a)
{
  Jet r(-a.v);
  for (int i = 0; i < Jet::kMax; i++)
  {
    r.g[i] = -a.g[i];
  }
  for (int i = 0; i < Jet::kMax * Jet::kMax; i++)
  {
    r.h[i] = -a.h[i];
  }
  return r;
}

inline Jet operator-(const Jet &a, const Jet &b)
{
  return a + (-b);
}

inline Jet operator*(const Jet &a, const Jet &b)
{
  Jet r(a.v * b.v);
  for (int i = 0; i < Jet::kMax; i++)
  {
    r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  }
  for (int i = 0; i < Jet::kMax; i++)
  {
    for (int j = 0; j < Jet::kMax; j++)
    {
      const int k = i * Jet::kMax + j;
      r.h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
    }
  }
  return r;
}

inline Jet operator/(const Jet &a, const Jet &b)
{
  const double inv = 1.0 / b.v;
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet &operator+=(Jet &a, const Jet &b)
{
  return a = a + b;
}

inline Jet &operator*=(Jet &a, const Jet &b)
{
  return a = a * b;
}

inline Jet sin(const Jet &a)
{
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, s, c, -s);
}

inline Jet cos(const Jet &a)
{
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, c, -s, -c);
}

inline Jet tan(const Jet &a)
{
  const double t = std::tan(a.v), s2 = 1.0 + t * t;
  return chain(a, t, s2, 2.0 * t * s2);
}

inline Jet exp(const Jet &a)
{
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

inline Jet log(const Jet &a)
{
  const double inv = 1.0 / a.v;
  return chain(a, std::log(a.v), inv, -inv * inv);
}

inline Jet sqrt(const Jet &a)
{
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet sinh(const Jet &a)
{
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return chain(a, s, c, s);
}

inline Jet cosh(const Jet &a)
{
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return chain(a, c, s, c);
}

inline Jet tanh(const Jet &a)
{
  const double t = std::tanh(a.v), s2 = 1.0 - t * t;
  return chain(a, t, s2, -2.0 * t * s2);
}

inline Jet pow(const Jet &a, double p)
{
  const double f0 = std::pow(a.v, p);
  const double f1 = p * std::pow(a.v, p - 1.0);
  const double f2 = p * (p - 1.0) * std::pow(a.v, p - 2.0);
  return chain(a, f0, f1, f2);
}

inline Jet pow(const Jet &a, const Jet &b)
{
  return exp(b * log(a));
}

}  // namespace kgspec
