// SPDX-License-Identifier: Apache-2.0
//
// The reduced Killing flow on T*Sigma, generated by H(x, xi) = beta(xi) + N |xi|_h,
// its periodic orbits and their linearized return maps.
//
// Phase points are (x, xi) with x lifted to the universal cover, so the net
// winding of a closed orbit is (x(T) - x(0)) / L componentwise.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>
#include <Eigen/Dense>
#include "kgspec/model.hpp"

namespace kgspec
{

struct PhasePoint
{
  std::vector<double> x, xi;
  double energy = 0.0;
};

struct HamiltonianValue
{
  double H = 0.0;
  Eigen::VectorXd grad;  // (dH/dx, dH/dxi)
  Eigen::MatrixXd hess;  // 2d x 2d, empty unless requested
};

// Throws NumericalError when |xi|_h < eps_xi (H is not smooth at the zero section).
HamiltonianValue reduced_hamiltonian(const StationaryModel &model, const double *x, const double *xi,
                                     bool want_hessian = false, double eps_xi = 1e-8);

// (x, xi / H(x, xi)), a point on the unit level.
PhasePoint unit_phase_point(const StationaryModel &model, const std::vector<double> &x, const std::vector<double> &xi);

// Largest Euclidean speed |dx/dt| over the model, sampled on a grid.
double max_speed(const StationaryModel &model, int points_per_axis = 32);

struct FlowOptions
{
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  double eps_xi = 1e-8;  // relative to |xi| at the start
  std::size_t max_steps = 2000000;
};

struct FlowResult
{
  PhasePoint end;
  Eigen::MatrixXd tangent;  // d(end)/d(start), 2d x 2d; empty unless requested
  double energy_drift = 0.0;
  std::size_t steps = 0;
};

FlowResult flow(const StationaryModel &model, const PhasePoint &p, double t, bool with_variational,
                const FlowOptions &opts = {});

// Samples of the trajectory at the given increasing times (t = 0 allowed).
std::vector<PhasePoint> trajectory(const StationaryModel &model, const PhasePoint &p, const std::vector<double> &times,
                                   const FlowOptions &opts = {});

// Canonical J = (0, I; -I, 0) of size 2d.
Eigen::MatrixXd symplectic_J(int d);

struct MonodromyReport
{
  Eigen::MatrixXd full;     // 2d x 2d tangent map over one period
  Eigen::MatrixXd reduced;  // (2d-2) x (2d-2) transversal map
  std::vector<std::complex<double>> multipliers;
  double det_I_minus_P = 1.0;
  double det_reduced = 1.0;
  double symplectic_defect = 0.0;  // ||M^T J M - J|| / ||J||
  double rotation_angle = -1.0;    // 2 x 2 elliptic transversals only
  std::string stability;           // elliptic | hyperbolic | degenerate | mixed
};

enum class Section
{
  Euler,     // complement spanned with the radial field (0, xi)
  Gradient,  // complement spanned with grad H
};

// Reduction of a full tangent map at a periodic point to the symplectic
// transversal inside {H = H(p)}: the flow direction and a complementary
// vector are quotiented out.
MonodromyReport reduce_monodromy(const StationaryModel &model, const PhasePoint &p, const Eigen::MatrixXd &M,
                                 Section section = Section::Euler, double tol_degenerate = 1e-6);

struct PeriodicOrbit
{
  PhasePoint seed;  // on the unit level
  double period = 0.0;
  double primitive_period = 0.0;
  int repetition = 1;
  std::vector<int> winding;
  Eigen::MatrixXd monodromy;  // reduced
  double det_I_minus_P = 0.0;
  double det_alt_section = 0.0;  // same quantity with the gradient section
  double symplectic_defect = 0.0;
  double energy_drift = 0.0;
  std::string stability;
  double closure_defect = 0.0;
  std::string origin;  // winding | scan | seed
};

struct OrbitSeed
{
  std::vector<double> x, xi;
  double period = 0.0;
  std::vector<int> winding;
};

struct OrbitSearch
{
  double t_max = 30.0;
  bool lattice_windings = true;               // straight-line guesses for every reachable winding
  std::vector<std::vector<int>> windings;     // extra winding targets
  std::vector<OrbitSeed> seeds;               // explicit guesses
  int scan_positions = 2;                     // per axis, for the near-return scan (0 disables)
  int scan_directions = 8;
  double scan_dt = 0.01;
  double near_return = 1e-2;
  double tol_orbit = 1e-9;
  int newton_iterations = 30;
  std::uint64_t rng_seed = 0;                 // jitter of scan positions
};

struct OrbitSearchResult
{
  std::vector<PeriodicOrbit> orbits;  // sorted by period, then winding
  std::vector<std::string> log;       // discarded candidates
  int candidates = 0;
};

// Newton refinement of one guess; throws NumericalError on non-convergence.
PeriodicOrbit refine_orbit(const StationaryModel &model, const OrbitSeed &guess, const OrbitSearch &search,
                           const FlowOptions &opts = {});

// Fills monodromy, determinant, stability and primitive period of a converged orbit.
void analyze_orbit(const StationaryModel &model, PeriodicOrbit &orbit, const FlowOptions &opts = {});

OrbitSearchResult find_periodic_orbits(const StationaryModel &model, const OrbitSearch &search,
                                       const FlowOptions &opts = {});

// Distinct periods of a search result, merged within tol.
std::vector<double> period_set(const std::vector<PeriodicOrbit> &orbits, double tol = 1e-6);

}  // namespace kgspec
