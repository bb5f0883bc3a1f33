// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include "kgspec/orbits.hpp"
#include "kgspec/pencil.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const json kCrafted = {{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}, {"lapse", "1+0.3*cos(x)"}, {"shift", {"0.2", "0"}}};

}  // namespace

TEST(Hamiltonian, HomogeneousOfDegreeOneWithConsistentGradient)
{
  const StationaryModel m = build_model(kCrafted);
  const double x[2] = {0.7, -1.1}, xi[2] = {0.4, 0.9};
  const HamiltonianValue h = reduced_hamiltonian(m, x, xi, true);
  const double xi3[2] = {3 * xi[0], 3 * xi[1]};
  EXPECT_NEAR(reduced_hamiltonian(m, x, xi3, false).H, 3 * h.H, 1e-13);
  // Euler: xi . dH/dxi = H.
  EXPECT_NEAR(xi[0] * h.grad[2] + xi[1] * h.grad[3], h.H, 1e-13);
  // Central differences against the automatic derivatives.
  const double eps = 1e-6;
  for (int i = 0; i < 4; i++)
  {
    double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]}, qp[2] = {xi[0], xi[1]}, qm[2] = {xi[0], xi[1]};
    (i < 2 ? xp[i] : qp[i - 2]) += eps;
    (i < 2 ? xm[i] : qm[i - 2]) -= eps;
    const double fd = (reduced_hamiltonian(m, xp, qp, false).H - reduced_hamiltonian(m, xm, qm, false).H) / (2 * eps);
    EXPECT_NEAR(h.grad[i], fd, 1e-8) << i;
  }
}

TEST(Flow, ConservesEnergyAndIsSymplectic)
{
  const StationaryModel m = build_model(kCrafted);
  const PhasePoint p = unit_phase_point(m, {0.3, 0.2}, {1.0, 0.6});
  EXPECT_NEAR(p.energy, 1.0, 1e-14);
  EXPECT_LT(flow(m, p, 100.0, false).energy_drift, 1e-10);
  const FlowResult v = flow(m, p, 7.0, true);
  const Eigen::MatrixXd J = symplectic_J(2);
  EXPECT_LT((v.tangent.transpose() * J * v.tangent - J).norm() / J.norm(), 1e-7);
}

TEST(Flow, FlatTorusGeodesicsAreStraightLines)
{
  const StationaryModel m = build_model({{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}});
  const PhasePoint p = unit_phase_point(m, {0.1, 0.2}, {3.0, 4.0});
  const FlowResult r = flow(m, p, 2.5, false);
  EXPECT_NEAR(r.end.x[0], 0.1 + 2.5 * 0.6, 1e-11);
  EXPECT_NEAR(r.end.x[1], 0.2 + 2.5 * 0.8, 1e-11);
}

TEST(PeriodicOrbits, CircleOrbitsHaveEmptyTransversal)
{
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}});
  OrbitSearch os;
  os.t_max = 13.0;
  const OrbitSearchResult r = find_periodic_orbits(m, os);
  ASSERT_EQ(r.orbits.size(), 4u);  // +-1 and +-2 windings
  for (const PeriodicOrbit &o : r.orbits)
  {
    EXPECT_NEAR(o.period, kTwoPi * std::abs(o.winding[0]), 1e-9);
    EXPECT_NEAR(o.primitive_period, kTwoPi, 1e-9);
    EXPECT_DOUBLE_EQ(o.det_I_minus_P, 1.0);
    EXPECT_EQ(o.stability, "elliptic");
  }
}

TEST(PeriodicOrbits, FlatTorusPeriodSetIsTheLatticeLengthSet)
{
  const double t_max = 20.0;
  std::vector<double> lattice;
  for (int a = -4; a <= 4; a++)
    for (int b = -4; b <= 4; b++)
      if ((a || b) && kTwoPi * std::hypot(a, b) <= t_max)
        lattice.push_back(kTwoPi * std::hypot(a, b));
  std::sort(lattice.begin(), lattice.end());
  lattice.erase(std::unique(lattice.begin(), lattice.end(), [](double u, double v) { return std::abs(u - v) < 1e-9; }),
                lattice.end());
  const StationaryModel m = build_model({{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}});
  OrbitSearch os;
  os.t_max = t_max;
  const OrbitSearchResult r = find_periodic_orbits(m, os);
  EXPECT_LT(max_matched_distance(period_set(r.orbits), lattice), 1e-8);
  for (const PeriodicOrbit &o : r.orbits)
    EXPECT_EQ(o.stability, "degenerate");
}

TEST(PeriodicOrbits, BothSectionsGiveTheSameDeterminant)
{
  const StationaryModel m = build_model(kCrafted);
  OrbitSearch os;
  os.t_max = 8.0;
  const OrbitSearchResult r = find_periodic_orbits(m, os);
  ASSERT_FALSE(r.orbits.empty());
  for (const PeriodicOrbit &o : r.orbits)
  {
    EXPECT_LT(o.closure_defect, 1e-8);
    EXPECT_NEAR(o.det_I_minus_P, o.det_alt_section, 1e-6 * (1 + std::abs(o.det_I_minus_P)));
    EXPECT_LT(o.symplectic_defect, 1e-7);
  }
}
