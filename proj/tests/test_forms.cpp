// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include "kgspec/discretization.hpp"
#include "kgspec/forms.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Case
{
  OperatorMatrices mats;
  SpectrumResult spec;
};

Case solve(const json &cfg, std::vector<int> pts)
{
  const StationaryModel m = build_model(cfg);
  Case c{assemble(m, SpectralGrid(std::move(pts), m.lengths)), {}};
  c.spec = solve_spectrum(c.mats);
  return c;
}

const json kMixed = {{"n", 2},
                     {"lengths", {kTwoPi}},
                     {"lapse", "1+0.2*cos(x)"},
                     {"shift", {"0.3*sin(x)"}},
                     {"potential", "0.5+0.2*cos(2*x)"}};

}  // namespace

TEST(Forms, EnergyFormEqualsHalfISigmaOnEveryModePair)
{
  const Case c = solve(kMixed, {32});
  const std::vector<int> idx = trusted_real_modes(c.spec);
  ASSERT_GT(idx.size(), 10u);
  double worst = 0.0;
  for (int j : idx)
    for (int k : idx)
    {
      const CauchyData u = cauchy_data(c.mats, c.spec.modes[j], j);
      const CauchyData v = cauchy_data(c.mats, c.spec.modes[k], k);
      // Q(u, v) = (i/2) sigma(conj u, D_Z v), with D_Z v = lambda_v v on modes.
      const cplx lhs = energy_form_Q(c.mats, u, v);
      const cplx rhs = cplx(0, 0.5) * symplectic_form_sigma(c.mats, conjugate(u), scaled(v, v.lambda));
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
  EXPECT_LT(worst, 1e-8);
}

TEST(Forms, SigmaIsAntisymmetricAndBothFormsAreTimeInvariant)
{
  const Case c = solve(kMixed, {32});
  const std::vector<int> idx = trusted_real_modes(c.spec);
  const CauchyData u = cauchy_data(c.mats, c.spec.modes[idx[2]], idx[2]);
  const CauchyData v = cauchy_data(c.mats, c.spec.modes[idx[5]], idx[5]);
  const CauchyData w = cauchy_data_from(c.mats, (u.g + cplx(0.3, 0.1) * v.g).eval(), (u.dt - v.dt).eval());
  EXPECT_LT(std::abs(symplectic_form_sigma(c.mats, u, w) + symplectic_form_sigma(c.mats, w, u)), 1e-12);
  for (double t : {0.4, 2.7})
  {
    const CauchyData ut = evolve(u, t), ut2 = evolve(conjugate(u), t);
    EXPECT_NEAR(std::abs(energy_form_Q(c.mats, ut, ut) - energy_form_Q(c.mats, u, u)), 0.0, 1e-11);
    EXPECT_NEAR(std::abs(symplectic_form_sigma(c.mats, ut2, ut) - symplectic_form_sigma(c.mats, conjugate(u), u)),
                0.0, 1e-11);
  }
}

TEST(Forms, SigmaPairsOnlyOppositeFrequencies)
{
  const Case c = solve({{"n", 2}, {"lengths", {kTwoPi}}, {"shift", {"0.2+0.05*cos(x)"}}}, {48});
  const PairingReport p = sigma_pairing_matrix(c.mats, c.spec);
  EXPECT_LT(p.max_offpair, 1e-7);
  EXPECT_LT(p.antisymmetry_defect, 1e-10);
  EXPECT_TRUE(p.violations.empty());
}

// Fourier count: e^{ikx} modes with k^2 + V < 0 on the unit circle.
TEST(Forms, PontryaginIndexCountsNegativeFourierModes)
{
  for (double V : {-0.5, -2.0, -4.5, 0.3})
  {
    int expect = 0;
    for (int k = -5; k <= 5; k++)
      expect += k * k + V < 0 ? 1 : 0;
    const Case c = solve({{"n", 2}, {"lengths", {kTwoPi}}, {"potential", V}}, {32});
    const PontryaginReport p = pontryagin_index(c.mats);
    EXPECT_EQ(p.index, expect) << V;
    EXPECT_EQ(p.indeterminate, 0) << V;
  }
}

TEST(Forms, ReportOnATorusShift)
{
  const Case c = solve({{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}, {"shift", {"0.2*sin(y)", "0"}}}, {10, 10});
  const FormsReport f = forms_report(c.mats, c.spec);
  EXPECT_LT(f.lemma12_max_defect, 1e-7);
  EXPECT_LT(f.pairing_max_offpair, 1e-7);
  EXPECT_LT(f.time_invariance_defect, 1e-9);
  EXPECT_GT(f.modes_used, 0);
}
