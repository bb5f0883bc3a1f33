// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include "kgspec/discretization.hpp"
#include "kgspec/orbits.hpp"
#include "kgspec/ppwave.hpp"
#include "kgspec/ppwave_orbits.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

StationaryModel benchmark()
{
  return build_model(
      {{"n", 3}, {"family", "ppwave"}, {"lengths", {kTwoPi}}, {"H", "1.15+0.1*cos(y)"}, {"L", 4.0}, {"alpha", 1.0}});
}

double nearest(const std::vector<EigenMode> &modes, double x)
{
  double best = std::numeric_limits<double>::infinity();
  for (const EigenMode &e : modes)
    best = std::min(best, std::abs(e.lambda - x));
  return best;
}

}  // namespace

TEST(PPWave, QuotientTorusHasTheShiftedIdentification)
{
  const StationaryModel m = benchmark();
  ASSERT_TRUE(m.ppwave.has_value());
  EXPECT_DOUBLE_EQ(m.lengths[0], 4.0);  // alpha L
  EXPECT_DOUBLE_EQ(m.lengths[1], kTwoPi);
  EXPECT_EQ(m.n, 3);
}

TEST(PPWave, ConstantModesSitOnTheirBranches)
{
  const StationaryModel m = benchmark();
  const SpectralGrid base({24}, {kTwoPi});
  const std::vector<double> fam = ppwave_constant_family(m, 4);
  ASSERT_EQ(fam.size(), 9u);
  for (int k = -4; k <= 4; k++)
  {
    // The y-constant mode of branch m has lambda = -2 pi m / L.
    const auto modes = ppwave_branch_modes(m, base, k, SolverOptions{});
    EXPECT_LT(nearest(modes, -kTwoPi * k / 4.0), 1e-10) << k;
  }
}

TEST(PPWave, BranchRootsAreReducedPencilEigenvalues)
{
  const StationaryModel m = benchmark();
  const SpectralGrid base({32}, {kTwoPi});
  for (int k : {0, 1, -2})
  {
    const BranchScanReport rep = ppwave_branch_solve(m, base, k, 0.05, 5.0);
    EXPECT_FALSE(rep.roots.empty()) << k;
    const auto modes = ppwave_branch_modes(m, base, k, SolverOptions{});
    for (double r : rep.roots)
    {
      EXPECT_LT(nearest(modes, r), 1e-6) << k << " " << r;
      EXPECT_LT(std::abs(ppwave_branch_function(m, base, k, r)), 1e-8);
    }
  }
}

TEST(PPWave, ReducedSpectrumMatchesTheFullQuotientSolve)
{
  const StationaryModel m = benchmark();
  SolverOptions opts;
  opts.cross_check = false;
  const SpectrumResult full = solve_spectrum(assemble(m, SpectralGrid({20, 16}, m.lengths)), opts);
  const SpectrumResult red = ppwave_spectrum(m, SpectralGrid({16}, {kTwoPi}), opts);
  const double window = 0.9 * std::min(full.lambda_cutoff, red.lambda_cutoff);
  std::vector<double> a, b;
  for (cplx z : full.trusted_values())
    if (std::abs(z) < window)
      a.push_back(z.real());
  for (cplx z : red.trusted_values())
    if (std::abs(z) < window)
      b.push_back(z.real());
  ASSERT_GE(a.size(), 6u);
  EXPECT_LT(max_matched_distance(a, b), 1e-7);
}

TEST(PPWaveOrbits, CriticalPointsOfTheProfile)
{
  const auto cps = ppwave_critical_points(benchmark());
  ASSERT_EQ(cps.size(), 2u);
  for (const CriticalPoint &c : cps)
  {
    if (c.type == "max")
    {
      EXPECT_NEAR(c.H, 1.25, 1e-12);
      EXPECT_NEAR(std::remainder(c.y[0], kTwoPi), 0.0, 1e-9);
    }
    else
    {
      EXPECT_EQ(c.type, "min");
      EXPECT_NEAR(c.H, 1.05, 1e-12);
      EXPECT_NEAR(c.y[0], std::numbers::pi, 1e-9);
    }
  }
}

TEST(PPWaveOrbits, EquilibriumPeriodsFollowTheClosedForm)
{
  const StationaryModel m = benchmark();
  const auto seeds = ppwave_equilibrium_seeds(m, 10.0);
  std::vector<double> got, expect;
  for (const OrbitSeed &s : seeds)
    got.push_back(s.period);
  for (double H : {1.25, 1.05})
    for (int k = 1; k <= 10; k++)
    {
      const double T = k * 4.0 * std::abs(2.0 / H - 1.0);
      if (T <= 10.0)
        expect.push_back(T);
    }
  EXPECT_LT(max_matched_distance(got, expect), 1e-12);
}

TEST(PPWaveOrbits, MechanicalRouteMatchesDirectFlowSearch)
{
  const StationaryModel m = benchmark();
  const double t_max = 8.0;
  std::vector<double> mech;
  for (const PPWaveClassicalOrbit &o : ppwave_period_set(m, t_max))
    mech.push_back(std::abs(o.cond.T));
  std::sort(mech.begin(), mech.end());
  mech.erase(std::unique(mech.begin(), mech.end(), [](double a, double b) { return std::abs(a - b) < 1e-6; }),
             mech.end());
  OrbitSearch os;
  os.t_max = t_max;
  os.seeds = ppwave_equilibrium_seeds(m, t_max);
  const std::vector<double> direct = period_set(find_periodic_orbits(m, os).orbits);
  EXPECT_LT(max_matched_distance(mech, direct), 1e-6);
  EXPECT_GE(direct.size(), 8u);
}
