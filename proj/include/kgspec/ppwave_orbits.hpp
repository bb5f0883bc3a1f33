// SPDX-License-Identifier: Apache-2.0
//
// Classical periods of x-independent pp-wave quotients from the motion in the
// transversal potential W = H/2. A mechanical orbit y(t) with p^2/2 + H/2 = E,
// followed for r turns (geodesic parameter span s = r * ell), closes in the
// quotient when
//
//   int_0^s (H(y(t)) - E) dt = alpha k L,
//
// and then has Killing period T = k L - s. An equilibrium y* (H'(y*) = 0) closes
// for every k with s = 2 alpha k L / H*. The orbits moving along the null
// translation direction close at T = k L for every transversal position.

#pragma once

#include <string>
#include <vector>
#include "kgspec/model.hpp"
#include "kgspec/orbits.hpp"

namespace kgspec
{

struct MechanicalOrbit
{
  std::string kind;  // translation | equilibrium | libration | rotation
  double E = 0.0;
  double ell = 0.0;        // primitive period (0 for equilibria)
  double J = 0.0;          // int over one period of (H - E) dt
  std::vector<double> y0;  // a point on the orbit
  int y_winding = 0;       // rotations: +-1
};

struct PeriodCondition
{
  double T = 0.0;  // Killing period, k L - s
  int k = 0;
  int r = 1;       // turns of the mechanical orbit (equilibria: 0)
  double s = 0.0;  // geodesic parameter span
};

// Integers k with |T| <= t_max satisfying both conditions for the given
// orbit, within tol (relative to alpha L).
std::vector<PeriodCondition> ppwave_period_conditions(const StationaryModel &model, const MechanicalOrbit &orbit,
                                                      double t_max, double tol = 1e-9, int max_turns = 1);

// Critical points of H on the base (one-dimensional bases are bracketed and
// refined; higher-dimensional bases use Newton from grid extrema).
struct CriticalPoint
{
  std::vector<double> y;
  double H = 0.0;
  std::string type;  // min | max | saddle
};
std::vector<CriticalPoint> ppwave_critical_points(const StationaryModel &model, int samples = 2048);

// Mechanical orbit of energy E through the libration well around a minimum,
// or the rotation at energy E (one-dimensional bases).
MechanicalOrbit ppwave_libration(const StationaryModel &model, const CriticalPoint &minimum, double E);
MechanicalOrbit ppwave_rotation(const StationaryModel &model, double E, int direction = 1);

struct PPWaveClassicalOrbit
{
  MechanicalOrbit mech;
  PeriodCondition cond;
  int multiplicity = 1;  // rotations in both directions share T
};

// All solutions with |T| <= t_max, sorted by |T|. Librations and rotations are
// enumerated on one-dimensional bases only.
std::vector<PPWaveClassicalOrbit> ppwave_period_set(const StationaryModel &model, double t_max);

// Guesses for find_periodic_orbits: the Killing-flow lifts of the equilibria
// for k = 1, ... with |T| <= t_max.
std::vector<OrbitSeed> ppwave_equilibrium_seeds(const StationaryModel &model, double t_max);

}  // namespace kgspec
