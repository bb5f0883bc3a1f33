// SPDX-License-Identifier: Apache-2.0

#include "kgspec/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <boost/numeric/odeint.hpp>
#include "kgspec/errors.hpp"
#include "kgspec/jet.hpp"
#include "kgspec/smallmat.hpp"

namespace kgspec
{

namespace
{

namespace ode = boost::numeric::odeint;
using State = std::vector<double>;

template <class T>
T hamiltonian(const StationaryModel &model, const T *x, const T *xi, T &norm_sq)
{
  const int d = model.d();
  T N, V, eta[kMaxDim], h[kMaxDim * kMaxDim], hinv[kMaxDim * kMaxDim];
  model.fields(x, N, eta, h, V);
  small_inverse(d, h, hinv);
  T bxi(0.0), n2(0.0);
  for (int i = 0; i < d; i++)
  {
    for (int j = 0; j < d; j++)
    {
      bxi = bxi + hinv[i * d + j] * eta[j] * xi[i];
      n2 = n2 + hinv[i * d + j] * xi[i] * xi[j];
    }
  }
  norm_sq = n2;
  using std::sqrt;
  return bxi + N * sqrt(n2);
}

double euclid(const std::vector<double> &v)
{
  double s = 0.0;
  for (double a : v)
    s += a * a;
  return std::sqrt(s);
}

// Position difference reduced to the fundamental cell around zero.
double torus_distance(const StationaryModel &model, const std::vector<double> &a, const std::vector<double> &b)
{
  double s = 0.0;
  for (int i = 0; i < model.d(); i++)
  {
    const double L = model.lengths[i];
    double dx = a[i] - b[i];
    dx -= L * std::round(dx / L);
    s += dx * dx;
  }
  return std::sqrt(s);
}

double phase_distance(const StationaryModel &model, const PhasePoint &a, const PhasePoint &b)
{
  double s = 0.0;
  for (int i = 0; i < model.d(); i++)
  {
    const double dxi = a.xi[i] - b.xi[i];
    s += dxi * dxi;
  }
  return torus_distance(model, a.x, b.x) + std::sqrt(s);
}

struct FlowSystem
{
  const StationaryModel &model;
  bool variational;
  double eps_xi;

  void operator()(const State &s, State &ds, double /*t*/) const
  {
    const int d = model.d();
    const HamiltonianValue hv = reduced_hamiltonian(model, s.data(), s.data() + d, variational, eps_xi);
    for (int i = 0; i < d; i++)
    {
      ds[i] = hv.grad[d + i];
      ds[d + i] = -hv.grad[i];
    }
    if (!variational)
      return;
    const int n = 2 * d;
    Eigen::Map<const Eigen::MatrixXd> M(s.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd> dM(ds.data() + n, n, n);
    Eigen::MatrixXd A(n, n);
    A.topRows(d) = hv.hess.bottomRows(d);
    A.bottomRows(d) = -hv.hess.topRows(d);
    dM = A * M;
  }
};

State pack(const PhasePoint &p, bool variational)
{
  const int d = static_cast<int>(p.x.size());
  State s(p.x);
  s.insert(s.end(), p.xi.begin(), p.xi.end());
  if (variational)
  {
    const int n = 2 * d;
    const std::size_t off = s.size();
    s.resize(off + static_cast<std::size_t>(n * n), 0.0);
    for (int i = 0; i < n; i++)
      s[off + static_cast<std::size_t>(i * n + i)] = 1.0;
  }
  return s;
}

PhasePoint unpack(const StationaryModel &model, const State &s)
{
  const int d = model.d();
  PhasePoint p;
  p.x.assign(s.begin(), s.begin() + d);
  p.xi.assign(s.begin() + d, s.begin() + 2 * d);
  p.energy = reduced_hamiltonian(model, p.x.data(), p.xi.data()).H;
  return p;
}

double xi_scale(const PhasePoint &p)
{
  return std::max(euclid(p.xi), 1e-300);
}

std::vector<double> lattice_shift(const StationaryModel &model, const std::vector<int> &w)
{
  std::vector<double> s(static_cast<std::size_t>(model.d()));
  for (int i = 0; i < model.d(); i++)
    s[i] = model.lengths[i] * w[i];
  return s;
}

std::string winding_text(const std::vector<int> &w)
{
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < w.size(); i++)
    os << (i ? "," : "") << w[i];
  os << ")";
  return os.str();
}

// Directions on the unit sphere of R^d used by the scan.
std::vector<std::vector<double>> scan_directions(int d, int count)
{
  std::vector<std::vector<double>> out;
  if (d == 1)
  {
    out = {{1.0}, {-1.0}};
  }
  else if (d == 2)
  {
    for (int k = 0; k < count; k++)
    {
      const double a = 2.0 * M_PI * (k + 0.5) / count;
      out.push_back({std::cos(a), std::sin(a)});
    }
  }
  else
  {
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; k++)
    {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      out.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
    }
  }
  return out;
}

// xi = h v, the covector of a unit velocity guess (exact when beta = 0).
std::vector<double> covector_of(const StationaryModel &model, const std::vector<double> &x, const std::vector<double> &v)
{
  const PointGeometry g = model.geometry_at(x.data());
  std::vector<double> xi(static_cast<std::size_t>(g.d), 0.0);
  for (int i = 0; i < g.d; i++)
    for (int j = 0; j < g.d; j++)
      xi[i] += g.h[i * g.d + j] * v[j];
  return xi;
}

}  // namespace

HamiltonianValue reduced_hamiltonian(const StationaryModel &model, const double *x, const double *xi,
                                     bool want_hessian, double eps_xi)
{
  const int d = model.d();
  HamiltonianValue out;
  out.grad.resize(2 * d);
  Jet xj[kMaxDim], xij[kMaxDim];
  for (int i = 0; i < d; i++)
  {
    xj[i] = Jet::variable(x[i], i);
    xij[i] = Jet::variable(xi[i], d + i);
  }
  Jet n2;
  const Jet H = hamiltonian(model, xj, xij, n2);
  if (!(n2.v > eps_xi * eps_xi))
  {
    throw NumericalError("trajectory reached the zero section (|xi|_h = " + std::to_string(std::sqrt(std::max(n2.v, 0.0))) +
                         ")");
  }
  out.H = H.v;
  for (int a = 0; a < 2 * d; a++)
    out.grad[a] = H.g[a];
  if (want_hessian)
  {
    out.hess.resize(2 * d, 2 * d);
    for (int a = 0; a < 2 * d; a++)
      for (int b = 0; b < 2 * d; b++)
        out.hess(a, b) = H.hess(a, b);
  }
  return out;
}

PhasePoint unit_phase_point(const StationaryModel &model, const std::vector<double> &x, const std::vector<double> &xi)
{
  const double H = reduced_hamiltonian(model, x.data(), xi.data()).H;
  if (!(H > 0.0))
  {
    throw NumericalError("reduced Hamiltonian is not positive");
  }
  PhasePoint p;
  p.x = x;
  p.xi = xi;
  for (double &v : p.xi)
    v /= H;
  p.energy = 1.0;
  return p;
}

double max_speed(const StationaryModel &model, int points_per_axis)
{
  const int d = model.d();
  SpectralGrid grid(std::vector<int>(static_cast<std::size_t>(d), points_per_axis), model.lengths);
  double vmax = 0.0;
  double x[kMaxDim];
  for (std::size_t p = 0; p < grid.size(); p++)
  {
    grid.node(p, x);
    const PointGeometry g = model.geometry_at(x);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> hinv(g.hinv, d, d);
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hinv).eigenvalues().maxCoeff();
    double b = 0.0;
    for (int i = 0; i < d; i++)
      b += g.beta[i] * g.beta[i];
    vmax = std::max(vmax, std::sqrt(b) + g.N * std::sqrt(lmax));
  }
  return vmax;
}

FlowResult flow(const StationaryModel &model, const PhasePoint &p, double t, bool with_variational,
                const FlowOptions &opts)
{
  if (t < 0.0)
  {
    throw NumericalError("flow: negative time");
  }
  const int d = model.d();
  FlowSystem sys{model, with_variational, opts.eps_xi * xi_scale(p)};
  State s = pack(p, with_variational);
  const double h0 = reduced_hamiltonian(model, p.x.data(), p.xi.data()).H;
  FlowResult r;
  if (t > 0.0)
  {
    auto stepper = ode::make_controlled(opts.abs_tol, opts.rel_tol, ode::runge_kutta_fehlberg78<State>());
    const std::vector<double> times = {0.0, t};
    try
    {
      r.steps = ode::integrate_times(stepper, sys, s, times.begin(), times.end(), std::min(0.01, t),
                                     ode::null_observer(), ode::max_step_checker(static_cast<int>(opts.max_steps)));
    }
    catch (const ode::step_adjustment_error &e)
    {
      throw NumericalError(std::string("flow: step size underflow: ") + e.what());
    }
    catch (const ode::no_progress_error &e)
    {
      throw NumericalError(std::string("flow: too many steps: ") + e.what());
    }
  }
  r.end = unpack(model, s);
  r.energy_drift = std::abs(r.end.energy - h0) / std::max(std::abs(h0), 1e-300);
  if (with_variational)
  {
    const int n = 2 * d;
    r.tangent = Eigen::Map<const Eigen::MatrixXd>(s.data() + n, n, n);
  }
  return r;
}

std::vector<PhasePoint> trajectory(const StationaryModel &model, const PhasePoint &p, const std::vector<double> &times,
                                   const FlowOptions &opts)
{
  std::vector<PhasePoint> out;
  if (times.empty())
    return out;
  if (times.front() < 0.0 || !std::is_sorted(times.begin(), times.end()))
  {
    throw NumericalError("trajectory: times must be increasing and non-negative");
  }
  FlowSystem sys{model, false, opts.eps_xi * xi_scale(p)};
  State s = pack(p, false);
  std::vector<double> ts;
  if (times.front() > 0.0)
    ts.push_back(0.0);
  ts.insert(ts.end(), times.begin(), times.end());
  const bool skip_first = times.front() > 0.0;
  auto observer = [&](const State &st, double tt)
  {
    if (skip_first && tt == 0.0)
      return;
    out.push_back(unpack(model, st));
  };
  auto stepper = ode::make_controlled(opts.abs_tol, opts.rel_tol, ode::runge_kutta_fehlberg78<State>());
  const double dt0 = ts.size() > 1 ? std::max(ts[1] - ts[0], 1e-6) : 0.01;
  try
  {
    ode::integrate_times(stepper, sys, s, ts.begin(), ts.end(), std::min(0.01, dt0), observer,
                         ode::max_step_checker(static_cast<int>(opts.max_steps)));
  }
  catch (const ode::step_adjustment_error &e)
  {
    throw NumericalError(std::string("trajectory: step size underflow: ") + e.what());
  }
  catch (const ode::no_progress_error &e)
  {
    throw NumericalError(std::string("trajectory: too many steps: ") + e.what());
  }
  return out;
}

Eigen::MatrixXd symplectic_J(int d)
{
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  J.topRightCorner(d, d).setIdentity();
  J.bottomLeftCorner(d, d) = -Eigen::MatrixXd::Identity(d, d);
  return J;
}

MonodromyReport reduce_monodromy(const StationaryModel &model, const PhasePoint &p, const Eigen::MatrixXd &M,
                                 Section section, double tol_degenerate)
{
  const int d = model.d();
  const int n = 2 * d;
  MonodromyReport rep;
  rep.full = M;
  const Eigen::MatrixXd J = symplectic_J(d);
  rep.symplectic_defect = (M.transpose() * J * M - J).norm() / J.norm();
  if (d == 1)
  {
    // Zero-dimensional transversal: the empty determinant.
    rep.reduced.resize(0, 0);
    rep.det_I_minus_P = 1.0;
    rep.det_reduced = 1.0;
    rep.stability = "elliptic";
    return rep;
  }
  const HamiltonianValue hv = reduced_hamiltonian(model, p.x.data(), p.xi.data());
  const Eigen::VectorXd a = J * hv.grad;  // flow direction
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  if (section == Section::Euler)
  {
    for (int i = 0; i < d; i++)
      b[d + i] = p.xi[i];
  }
  else
  {
    b = hv.grad;
  }
  auto omega = [&](const Eigen::VectorXd &u, const Eigen::VectorXd &v) { return u.dot(J * v); };
  const double wba = omega(b, a);
  if (std::abs(wba) < 1e-12 * a.norm() * b.norm())
  {
    throw NumericalError("monodromy: section vector is tangent to the energy level");
  }
  // Projection onto the symplectic complement of span{a, b}, along span{a, b}.
  Eigen::MatrixXd Pi = Eigen::MatrixXd::Identity(n, n);
  Pi -= a * (b.transpose() * J) / wba;
  Pi -= b * (a.transpose() * J) / (-wba);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Pi, Eigen::ComputeFullU);
  const Eigen::MatrixXd B = svd.matrixU().leftCols(n - 2);
  rep.reduced = B.transpose() * Pi * M * B;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n - 2, n - 2);
  rep.det_I_minus_P = (I - rep.reduced).determinant();
  rep.det_reduced = rep.reduced.determinant();
  Eigen::EigenSolver<Eigen::MatrixXd> es(rep.reduced);
  int on_circle = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); k++)
  {
    const std::complex<double> mu = es.eigenvalues()[k];
    rep.multipliers.push_back(mu);
    if (std::abs(std::abs(mu) - 1.0) < 1e-5)
      on_circle++;
  }
  if (std::abs(rep.det_I_minus_P) < tol_degenerate)
    rep.stability = "degenerate";
  else if (on_circle == n - 2)
    rep.stability = "elliptic";
  else if (on_circle == 0)
    rep.stability = "hyperbolic";
  else
    rep.stability = "mixed";
  if (n - 2 == 2 && rep.stability == "elliptic")
  {
    rep.rotation_angle = std::acos(std::clamp(0.5 * rep.reduced.trace(), -1.0, 1.0));
  }
  return rep;
}

PeriodicOrbit refine_orbit(const StationaryModel &model, const OrbitSeed &guess, const OrbitSearch &search,
                           const FlowOptions &opts)
{
  const int d = model.d();
  const int n = 2 * d;
  if (static_cast<int>(guess.x.size()) != d || static_cast<int>(guess.xi.size()) != d ||
      static_cast<int>(guess.winding.size()) != d)
  {
    throw NumericalError("orbit guess has the wrong dimension");
  }
  const std::vector<double> shift = lattice_shift(model, guess.winding);
  PhasePoint z = unit_phase_point(model, guess.x, guess.xi);
  double T = guess.period;

  auto residual = [&](const PhasePoint &p, double t, FlowResult *fr)
  {
    FlowResult r = flow(model, p, t, fr != nullptr, opts);
    Eigen::VectorXd F(n + 1);
    for (int i = 0; i < d; i++)
    {
      F[i] = r.end.x[i] - p.x[i] - shift[i];
      F[d + i] = r.end.xi[i] - p.xi[i];
    }
    F[n] = reduced_hamiltonian(model, p.x.data(), p.xi.data()).H - 1.0;
    if (fr)
      *fr = std::move(r);
    return F;
  };

  FlowResult fr;
  Eigen::VectorXd F = residual(z, T, &fr);
  for (int it = 0; it < search.newton_iterations; it++)
  {
    if (F.norm() < search.tol_orbit)
    {
      PeriodicOrbit orb;
      orb.seed = z;
      orb.period = T;
      orb.winding = guess.winding;
      orb.closure_defect = F.head(n).norm();
      return orb;
    }
    Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Jac.topLeftCorner(n, n) = fr.tangent - Eigen::MatrixXd::Identity(n, n);
    const HamiltonianValue he = reduced_hamiltonian(model, fr.end.x.data(), fr.end.xi.data());
    for (int i = 0; i < d; i++)
    {
      Jac(i, n) = he.grad[d + i];
      Jac(d + i, n) = -he.grad[i];
    }
    const HamiltonianValue h0 = reduced_hamiltonian(model, z.x.data(), z.xi.data());
    Jac.block(n, 0, 1, n) = h0.grad.transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Jac);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd step = cod.solve(-F);
    double scale = 1.0;
    const double cap = 0.25 * *std::min_element(model.lengths.begin(), model.lengths.end());
    if (step.head(d).norm() > cap)
      scale = cap / step.head(d).norm();
    bool accepted = false;
    for (int ls = 0; ls < 12; ls++, scale *= 0.5)
    {
      PhasePoint trial = z;
      for (int i = 0; i < d; i++)
      {
        trial.x[i] += scale * step[i];
        trial.xi[i] += scale * step[d + i];
      }
      const double Tt = T + scale * step[n];
      if (!(Tt > 0.0) || Tt > 1.5 * search.t_max + 1.0)
        continue;
      FlowResult trial_fr;
      Eigen::VectorXd Ft;
      try
      {
        Ft = residual(trial, Tt, &trial_fr);
      }
      catch (const NumericalError &)
      {
        continue;
      }
      if (Ft.norm() < F.norm() || Ft.norm() < search.tol_orbit)
      {
        z = trial;
        T = Tt;
        F = Ft;
        fr = std::move(trial_fr);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
  }
  if (F.norm() < search.tol_orbit)
  {
    PeriodicOrbit orb;
    orb.seed = z;
    orb.period = T;
    orb.winding = guess.winding;
    orb.closure_defect = F.head(n).norm();
    return orb;
  }
  std::ostringstream os;
  os << "Newton did not converge for winding " << winding_text(guess.winding) << " from period guess "
     << guess.period << " (residual " << F.norm() << ")";
  throw NumericalError(os.str());
}

void analyze_orbit(const StationaryModel &model, PeriodicOrbit &orbit, const FlowOptions &opts)
{
  const FlowResult fr = flow(model, orbit.seed, orbit.period, true, opts);
  orbit.energy_drift = fr.energy_drift;
  const MonodromyReport m = reduce_monodromy(model, orbit.seed, fr.tangent, Section::Euler);
  const MonodromyReport alt = reduce_monodromy(model, orbit.seed, fr.tangent, Section::Gradient);
  orbit.monodromy = m.reduced;
  orbit.det_I_minus_P = m.det_I_minus_P;
  orbit.det_alt_section = alt.det_I_minus_P;
  orbit.symplectic_defect = m.symplectic_defect;
  orbit.stability = m.stability;

  // Primitive period: the largest k for which the orbit already closes at T / k.
  int g = 0;
  for (int w : orbit.winding)
    g = std::gcd(g, std::abs(w));
  const int kmax = g == 0 ? 6 : g;
  orbit.primitive_period = orbit.period;
  orbit.repetition = 1;
  for (int k = kmax; k >= 2; k--)
  {
    if (g != 0 && g % k != 0)
      continue;
    const FlowResult part = flow(model, orbit.seed, orbit.period / k, false, opts);
    double defect = 0.0;
    for (int i = 0; i < model.d(); i++)
    {
      defect += std::abs(part.end.x[i] - orbit.seed.x[i] - model.lengths[i] * orbit.winding[i] / k);
      defect += std::abs(part.end.xi[i] - orbit.seed.xi[i]);
    }
    if (defect < 1e-6)
    {
      orbit.primitive_period = orbit.period / k;
      orbit.repetition = k;
      break;
    }
  }
}

OrbitSearchResult find_periodic_orbits(const StationaryModel &model, const OrbitSearch &search, const FlowOptions &opts)
{
  const int d = model.d();
  OrbitSearchResult res;
  std::vector<std::pair<OrbitSeed, std::string>> guesses;

  // Straight-line guesses for each winding reachable within t_max.
  std::vector<std::vector<int>> windings = search.windings;
  if (search.lattice_windings)
  {
    const double reach = max_speed(model) * search.t_max;
    std::vector<int> wmax(static_cast<std::size_t>(d));
    for (int i = 0; i < d; i++)
      wmax[i] = static_cast<int>(std::floor(reach / model.lengths[i]));
    std::vector<int> w(static_cast<std::size_t>(d));
    std::function<void(int)> rec = [&](int axis)
    {
      if (axis == d)
      {
        double len = 0.0;
        bool zero = true;
        for (int i = 0; i < d; i++)
        {
          len += std::pow(model.lengths[i] * w[i], 2);
          zero = zero && w[i] == 0;
        }
        if (!zero && std::sqrt(len) <= reach)
          windings.push_back(w);
        return;
      }
      for (int k = -wmax[axis]; k <= wmax[axis]; k++)
      {
        w[axis] = k;
        rec(axis + 1);
      }
    };
    rec(0);
  }
  for (const auto &w : windings)
  {
    std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
    std::vector<double> v = lattice_shift(model, w);
    const double len = euclid(v);
    for (double &c : v)
      c /= len;
    OrbitSeed s;
    s.x = x0;
    s.xi = covector_of(model, x0, v);
    s.winding = w;
    const PhasePoint p = unit_phase_point(model, s.x, s.xi);
    const HamiltonianValue hv = reduced_hamiltonian(model, p.x.data(), p.xi.data());
    s.period = len / hv.grad.tail(d).norm();
    guesses.push_back({s, "winding"});
  }
  for (const auto &s : search.seeds)
    guesses.push_back({s, "seed"});

  // Near-return scan.
  if (search.scan_positions > 0)
  {
    std::mt19937_64 rng(search.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto dirs = scan_directions(d, search.scan_directions);
    int total = 1;
    for (int i = 0; i < d; i++)
      total *= search.scan_positions;
    std::vector<double> times;
    for (double t = search.scan_dt; t <= search.t_max + 1e-12; t += search.scan_dt)
      times.push_back(t);
    for (int c = 0; c < total; c++)
    {
      std::vector<double> x0(static_cast<std::size_t>(d));
      int rem = c;
      for (int i = d - 1; i >= 0; i--)
      {
        const int k = rem % search.scan_positions;
        rem /= search.scan_positions;
        x0[i] = (k + unit(rng)) * model.lengths[i] / search.scan_positions;
      }
      for (const auto &v : dirs)
      {
        const PhasePoint p = unit_phase_point(model, x0, covector_of(model, x0, v));
        std::vector<PhasePoint> traj;
        try
        {
          traj = trajectory(model, p, times, opts);
        }
        catch (const NumericalError &e)
        {
          res.log.push_back(std::string("scan aborted: ") + e.what());
          continue;
        }
        std::vector<double> dist(traj.size());
        for (std::size_t k = 0; k < traj.size(); k++)
          dist[k] = phase_distance(model, traj[k], p);
        for (std::size_t k = 1; k + 1 < traj.size(); k++)
        {
          if (dist[k] < search.near_return && dist[k] < dist[k - 1] && dist[k] <= dist[k + 1])
          {
            OrbitSeed s;
            s.x = p.x;
            s.xi = p.xi;
            s.period = times[k];
            s.winding.resize(static_cast<std::size_t>(d));
            for (int i = 0; i < d; i++)
              s.winding[i] = static_cast<int>(std::lround((traj[k].x[i] - p.x[i]) / model.lengths[i]));
            guesses.push_back({s, "scan"});
          }
        }
      }
    }
  }

  res.candidates = static_cast<int>(guesses.size());
  std::vector<PeriodicOrbit> found;
  for (const auto &[g, origin] : guesses)
  {
    PeriodicOrbit orb;
    try
    {
      orb = refine_orbit(model, g, search, opts);
    }
    catch (const NumericalError &e)
    {
      res.log.push_back(origin + ": " + e.what());
      continue;
    }
    if (orb.period > search.t_max + 1e-9)
    {
      continue;
    }
    orb.origin = origin;
    // Same winding and period: same orbit if the seed lies on the known loop.
    bool duplicate = false;
    for (const auto &o : found)
    {
      if (o.winding != orb.winding || std::abs(o.period - orb.period) > 1e-6 * (1.0 + o.period))
        continue;
      std::vector<double> times;
      const int samples = 400;
      for (int k = 0; k <= samples; k++)
        times.push_back(o.period * k / samples);
      const auto loop = trajectory(model, o.seed, times, opts);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < loop.size(); k++)
      {
        best = std::min(best, phase_distance(model, loop[k], orb.seed));
      }
      const double spacing = max_speed(model, 8) * o.period / samples;
      if (best < 1e-5 + spacing)
      {
        duplicate = true;
        break;
      }
    }
    if (!duplicate)
      found.push_back(orb);
  }
  for (auto &o : found)
  {
    analyze_orbit(model, o, opts);
  }
  // Degenerate families: one representative per (winding, period).
  std::vector<PeriodicOrbit> kept;
  for (auto &o : found)
  {
    bool dup = false;
    for (const auto &k : kept)
    {
      if (k.winding == o.winding && std::abs(k.period - o.period) <= 1e-6 * (1.0 + o.period) &&
          k.stability == "degenerate" && o.stability == "degenerate")
        dup = true;
    }
    if (!dup)
      kept.push_back(std::move(o));
  }
  std::sort(kept.begin(), kept.end(),
            [](const PeriodicOrbit &a, const PeriodicOrbit &b)
            {
              if (a.period != b.period)
                return a.period < b.period;
              return a.winding < b.winding;
            });
  res.orbits = std::move(kept);
  return res;
}

std::vector<double> period_set(const std::vector<PeriodicOrbit> &orbits, double tol)
{
  std::vector<double> t;
  for (const auto &o : orbits)
    t.push_back(o.period);
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t)
  {
    if (out.empty() || v - out.back() > tol * (1.0 + v))
      out.push_back(v);
  }
  return out;
}

}  // namespace kgspec
