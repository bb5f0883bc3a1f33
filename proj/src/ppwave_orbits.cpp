// SPDX-License-Identifier: Apache-2.0

#include "kgspec/ppwave_orbits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include "kgspec/errors.hpp"
#include "kgspec/jet.hpp"
#include "kgspec/ppwave.hpp"

namespace kgspec
{

namespace
{

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double H1(const PPWaveParams &pp, double y)
{
  return pp.H.eval(&y);
}

double dH1(const PPWaveParams &pp, double y)
{
  const Jet j = Jet::variable(y, 0);
  return pp.H.eval(&j).g[0];
}

double d2H1(const PPWaveParams &pp, double y)
{
  const Jet j = Jet::variable(y, 0);
  return pp.H.eval(&j).hess(0, 0);
}

template <class F>
double bracket_root(F f, double a, double b)
{
  std::uintmax_t iters = 200;
  boost::math::tools::eps_tolerance<double> tol(52);
  const auto r = boost::math::tools::toms748_solve(f, a, b, tol, iters);
  return 0.5 * (r.first + r.second);
}

// Neighbouring maxima of a minimum on the circle, unwrapped around it.
std::pair<double, double> well_edges(const std::vector<CriticalPoint> &crit, const CriticalPoint &minimum,
                                     double period)
{
  double left = minimum.y[0] - period, right = minimum.y[0] + period;
  for (const CriticalPoint &c : crit)
  {
    if (c.type != "max")
      continue;
    for (double shift : {-period, 0.0, period})
    {
      const double y = c.y[0] + shift;
      if (y < minimum.y[0] && y > left)
        left = y;
      if (y > minimum.y[0] && y < right)
        right = y;
    }
  }
  return {left, right};
}

const std::vector<double> &base_lengths_1d(const PPWaveParams &pp)
{
  if (pp.base_lengths.size() != 1)
  {
    throw ConfigError("mechanical orbits are enumerated on one-dimensional bases only");
  }
  return pp.base_lengths;
}

}  // namespace

std::vector<PeriodCondition> ppwave_period_conditions(const StationaryModel &model, const MechanicalOrbit &orbit,
                                                      double t_max, double tol, int max_turns)
{
  const PPWaveParams &pp = ppwave_params(model);
  const double aL = pp.alpha * pp.L;
  std::vector<PeriodCondition> out;
  if (orbit.kind == "equilibrium")
  {
    // I(s) = s (H* - E) with E = H*/2, so any k > 0 closes at s = 2 alpha k L / H*.
    const double Hs = 2.0 * orbit.E;
    for (int k = 1;; k++)
    {
      const double s = 2.0 * aL * k / Hs;
      const double T = k * pp.L - s;
      if (std::abs(T) > t_max)
        break;
      out.push_back({T, k, 0, s});
      if (k > 100000)
        break;
    }
    return out;
  }
  if (orbit.kind == "translation")
  {
    for (int k = 1; k * pp.L <= t_max * (1.0 + 1e-12); k++)
      out.push_back({k * pp.L, k, 0, 0.0});
    return out;
  }
  if (orbit.ell <= 0.0)
  {
    throw NumericalError("mechanical orbit without a positive period");
  }
  for (int r = 1; r <= max_turns; r++)
  {
    const double I = r * orbit.J;
    const double kf = I / aL;
    const int k = static_cast<int>(std::lround(kf));
    if (std::abs(I - aL * k) > tol * std::abs(aL))
      continue;
    const double s = r * orbit.ell;
    const double T = k * pp.L - s;
    if (std::abs(T) <= t_max)
      out.push_back({T, k, r, s});
  }
  return out;
}

std::vector<CriticalPoint> ppwave_critical_points(const StationaryModel &model, int samples)
{
  const PPWaveParams &pp = ppwave_params(model);
  std::vector<CriticalPoint> out;
  if (pp.base_lengths.size() == 1)
  {
    const double Ly = pp.base_lengths[0];
    const double dy = Ly / samples;
    for (int i = 0; i < samples; i++)
    {
      const double a = i * dy, b = (i + 1) * dy;
      const double fa = dH1(pp, a), fb = dH1(pp, b);
      double y;
      if (fa == 0.0)
        y = a;
      else if (fa * fb < 0.0)
        y = bracket_root([&](double t) { return dH1(pp, t); }, a, b);
      else
        continue;
      const double c = d2H1(pp, y);
      CriticalPoint cp;
      cp.y = {std::fmod(y, Ly)};
      cp.H = H1(pp, y);
      cp.type = c > 0.0 ? "min" : (c < 0.0 ? "max" : "saddle");
      out.push_back(cp);
    }
    return out;
  }
  // Two-dimensional bases: Newton on grad H from discrete extrema and saddles.
  if (pp.base_lengths.size() != 2)
  {
    throw ConfigError("pp-wave base of unsupported dimension");
  }
  const int m = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(samples))));
  const double L0 = pp.base_lengths[0], L1 = pp.base_lengths[1];
  auto Hat = [&](int i, int j) {
    const double y[2] = {L0 * ((i % m + m) % m) / m, L1 * ((j % m + m) % m) / m};
    return pp.H.eval(y);
  };
  for (int i = 0; i < m; i++)
  {
    for (int j = 0; j < m; j++)
    {
      const double c = Hat(i, j);
      bool lo = true, hi = true;
      for (int a = -1; a <= 1; a++)
        for (int b = -1; b <= 1; b++)
        {
          if (a == 0 && b == 0)
            continue;
          const double v = Hat(i + a, j + b);
          lo = lo && c < v;
          hi = hi && c > v;
        }
      if (!lo && !hi)
        continue;
      double y[2] = {L0 * i / m, L1 * j / m};
      bool ok = false;
      for (int it = 0; it < 50; it++)
      {
        Jet jy[2] = {Jet::variable(y[0], 0), Jet::variable(y[1], 1)};
        const Jet h = pp.H.eval(jy);
        Eigen::Matrix2d A;
        A << h.hess(0, 0), h.hess(0, 1), h.hess(1, 0), h.hess(1, 1);
        const Eigen::Vector2d g(h.g[0], h.g[1]);
        if (g.norm() < 1e-13)
        {
          ok = true;
          break;
        }
        const Eigen::Vector2d step = A.fullPivLu().solve(g);
        y[0] -= step[0];
        y[1] -= step[1];
      }
      if (!ok)
        continue;
      y[0] = std::fmod(std::fmod(y[0], L0) + L0, L0);
      y[1] = std::fmod(std::fmod(y[1], L1) + L1, L1);
      bool dup = false;
      for (const CriticalPoint &c2 : out)
        dup = dup || (std::hypot(c2.y[0] - y[0], c2.y[1] - y[1]) < 1e-8);
      if (dup)
        continue;
      Jet jy[2] = {Jet::variable(y[0], 0), Jet::variable(y[1], 1)};
      const Jet h = pp.H.eval(jy);
      const double det = h.hess(0, 0) * h.hess(1, 1) - h.hess(0, 1) * h.hess(1, 0);
      CriticalPoint cp;
      cp.y = {y[0], y[1]};
      cp.H = h.v;
      cp.type = det < 0.0 ? "saddle" : (h.hess(0, 0) > 0.0 ? "min" : "max");
      out.push_back(cp);
    }
  }
  return out;
}

namespace
{

MechanicalOrbit libration_in_well(const PPWaveParams &pp, double ym, double left, double right, double E)
{
  auto f = [&](double y) { return H1(pp, y) - 2.0 * E; };
  if (!(f(ym) < 0.0 && f(left) > 0.0 && f(right) > 0.0))
  {
    throw NumericalError("energy outside the libration band of this well");
  }
  const double y1 = bracket_root(f, left, ym);
  const double y2 = bracket_root(f, ym, right);
  // y = c + w sin(theta) removes the turning-point singularities.
  const double c = 0.5 * (y1 + y2), w = 0.5 * (y2 - y1);
  auto speed = [&](double th) {
    const double y = c + w * std::sin(th);
    const double p2 = 2.0 * E - H1(pp, y);
    return std::make_pair(y, w * std::cos(th) / std::sqrt(std::max(p2, 1e-300)));
  };
  const double h = std::numbers::pi / 2;
  MechanicalOrbit o;
  o.kind = "libration";
  o.E = E;
  o.ell = 2.0 * GK::integrate([&](double th) { return speed(th).second; }, -h, h, 8, 1e-12);
  o.J = 2.0 * GK::integrate(
                  [&](double th) {
                    const auto [y, ds] = speed(th);
                    return (H1(pp, y) - E) * ds;
                  },
                  -h, h, 8, 1e-12);
  o.y0 = {y1};
  return o;
}

}  // namespace

MechanicalOrbit ppwave_libration(const StationaryModel &model, const CriticalPoint &minimum, double E)
{
  const PPWaveParams &pp = ppwave_params(model);
  const double Ly = base_lengths_1d(pp)[0];
  const auto [left, right] = well_edges(ppwave_critical_points(model), minimum, Ly);
  return libration_in_well(pp, minimum.y[0], left, right, E);
}

namespace
{

// The integrand peaks at the top of H; tanh-sinh nodes cluster at the ends of
// [ytop, ytop + Ly], which keeps energies close to the separatrix cheap.
MechanicalOrbit rotation_from(const PPWaveParams &pp, double ytop, double E, int direction)
{
  const double Ly = pp.base_lengths[0];
  auto dt = [&](double y) {
    const double p2 = 2.0 * E - H1(pp, y);
    if (p2 <= 0.0)
      throw NumericalError("energy below the rotation band");
    return 1.0 / std::sqrt(p2);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  MechanicalOrbit o;
  o.kind = "rotation";
  o.E = E;
  o.ell = ts.integrate(dt, ytop, ytop + Ly, 1e-13);
  o.J = ts.integrate([&](double y) { return (H1(pp, y) - E) * dt(y); }, ytop, ytop + Ly, 1e-13);
  o.y0 = {ytop};
  o.y_winding = direction >= 0 ? 1 : -1;
  return o;
}

double top_of(const std::vector<CriticalPoint> &crit)
{
  double y = 0.0, h = -1e300;
  for (const CriticalPoint &c : crit)
  {
    if (c.H > h)
    {
      h = c.H;
      y = c.y[0];
    }
  }
  return y;
}

}  // namespace

MechanicalOrbit ppwave_rotation(const StationaryModel &model, double E, int direction)
{
  const PPWaveParams &pp = ppwave_params(model);
  base_lengths_1d(pp);
  return rotation_from(pp, top_of(ppwave_critical_points(model)), E, direction);
}

namespace
{

// Solutions of r J(E) = alpha k L on (e_lo, e_hi) for r = 1, 2, ..., using
// T_r(E) = r (J/alpha - ell) for the bound on r.
template <class Make>
void scan_band(const PPWaveParams &pp, Make make, double e_lo, double e_hi, double t_max, int multiplicity,
               std::vector<PPWaveClassicalOrbit> &out)
{
  const int samples = 160;
  const double aL = pp.alpha * pp.L;
  std::vector<double> Es(samples + 1);
  std::vector<MechanicalOrbit> orbs(samples + 1);
  double min_T1 = 1e300;
  for (int i = 0; i <= samples; i++)
  {
    const double u = 0.5 * (1.0 - std::cos(std::numbers::pi * i / samples));
    Es[i] = e_lo + (e_hi - e_lo) * u;
    orbs[i] = make(Es[i]);
    min_T1 = std::min(min_T1, std::abs(orbs[i].J / pp.alpha - orbs[i].ell));
  }
  for (int r = 1; r <= 64 && r * min_T1 <= t_max * (1.0 + 1e-9); r++)
  {
    for (int i = 0; i < samples; i++)
    {
      const double ka = r * orbs[i].J / aL, kb = r * orbs[i + 1].J / aL;
      const int k0 = static_cast<int>(std::ceil(std::min(ka, kb)));
      const int k1 = static_cast<int>(std::floor(std::max(ka, kb)));
      for (int k = k0; k <= k1; k++)
      {
        // T = k L - r ell is monotone across a fine interval; skip roots that land beyond t_max.
        const double Ta = k * pp.L - r * orbs[i].ell, Tb = k * pp.L - r * orbs[i + 1].ell;
        if (Ta * Tb > 0.0 && std::min(std::abs(Ta), std::abs(Tb)) > 1.05 * t_max)
          continue;
        auto g = [&](double E) { return r * make(E).J - aL * k; };
        double E;
        if (g(Es[i]) == 0.0)
          E = Es[i];
        else if (g(Es[i + 1]) == 0.0)
          continue;  // picked up by the next interval
        else
          E = bracket_root(g, Es[i], Es[i + 1]);
        const MechanicalOrbit mo = make(E);
        const double s = r * mo.ell;
        const double T = k * pp.L - s;
        if (std::abs(T) <= t_max)
          out.push_back({mo, {T, k, r, s}, multiplicity});
      }
    }
  }
}

}  // namespace

std::vector<PPWaveClassicalOrbit> ppwave_period_set(const StationaryModel &model, double t_max)
{
  const PPWaveParams &pp = ppwave_params(model);
  const auto crit = ppwave_critical_points(model);
  std::vector<PPWaveClassicalOrbit> out;
  MechanicalOrbit tr;
  tr.kind = "translation";
  for (const PeriodCondition &pc : ppwave_period_conditions(model, tr, t_max))
  {
    out.push_back({tr, pc, 1});
  }
  for (const CriticalPoint &c : crit)
  {
    MechanicalOrbit eq;
    eq.kind = "equilibrium";
    eq.E = 0.5 * c.H;
    eq.y0 = c.y;
    for (const PeriodCondition &pc : ppwave_period_conditions(model, eq, t_max))
    {
      out.push_back({eq, pc, 1});
    }
  }
  if (pp.base_lengths.size() == 1)
  {
    double hmax = -1e300;
    for (const CriticalPoint &c : crit)
      hmax = std::max(hmax, c.H);
    for (const CriticalPoint &c : crit)
    {
      if (c.type != "min")
        continue;
      const auto [left, right] = well_edges(crit, c, pp.base_lengths[0]);
      const double barrier = std::min(H1(pp, left), H1(pp, right));
      const double lo = 0.5 * c.H, hi = 0.5 * barrier;
      const double pad = 1e-9 * (hi - lo);
      scan_band(
          pp, [&](double E) { return libration_in_well(pp, c.y[0], left, right, E); }, lo + pad, hi - pad, t_max, 1, out);
    }
    // Rotations: extend the band until a single turn exceeds t_max.
    const double lo = 0.5 * hmax * (1.0 + 1e-9);
    const double ytop = top_of(crit);
    auto T1 = [&](double E) {
      const MechanicalOrbit o = rotation_from(pp, ytop, E, 1);
      return std::abs(o.J / pp.alpha - o.ell);
    };
    double hi = std::max(2.0 * lo, lo + 1.0);
    for (int it = 0; it < 60 && T1(hi) <= t_max; it++)
      hi = lo + 2.0 * (hi - lo);
    scan_band(
        pp, [&](double E) { return rotation_from(pp, ytop, E, 1); }, lo, hi, t_max, 2, out);
  }
  std::sort(out.begin(), out.end(), [](const PPWaveClassicalOrbit &a, const PPWaveClassicalOrbit &b) {
    return std::abs(a.cond.T) < std::abs(b.cond.T);
  });
  return out;
}

std::vector<OrbitSeed> ppwave_equilibrium_seeds(const StationaryModel &model, double t_max)
{
  const PPWaveParams &pp = ppwave_params(model);
  std::vector<OrbitSeed> out;
  for (const CriticalPoint &c : ppwave_critical_points(model))
  {
    MechanicalOrbit eq;
    eq.kind = "equilibrium";
    eq.E = 0.5 * c.H;
    for (const PeriodCondition &pc : ppwave_period_conditions(model, eq, t_max))
    {
      // Unit-speed lift: xi_sigma = (H* - 2 alpha) / (alpha H*), moving against sigma.
      OrbitSeed s;
      s.x = {0.0};
      s.x.insert(s.x.end(), c.y.begin(), c.y.end());
      s.xi.assign(s.x.size(), 0.0);
      s.xi[0] = (c.H - 2.0 * pp.alpha) / (pp.alpha * c.H);
      s.period = std::abs(pc.T);
      s.winding.assign(s.x.size(), 0);
      s.winding[0] = pc.T < 0.0 ? -pc.k : pc.k;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace kgspec
