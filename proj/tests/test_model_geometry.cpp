// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include "kgspec/errors.hpp"
#include "kgspec/model.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string config_error(const json &cfg)
{
  try
  {
    build_model(cfg);
  }
  catch (const ConfigError &e)
  {
    return e.what();
  }
  return "";
}

// Vol{H <= 1} from the polar formula, written out independently of the library.
double polar_volume(const StationaryModel &m, int points, int angles)
{
  const int d = m.d();
  const SpectralGrid g(std::vector<int>(static_cast<std::size_t>(d), points), m.lengths);
  double vol = 0.0;
  double x[kMaxDim];
  for (std::size_t k = 0; k < g.size(); k++)
  {
    g.node(k, x);
    const PointGeometry p = m.geometry_at(x);
    const int na = d == 1 ? 2 : angles;
    for (int a = 0; a < na; a++)
    {
      const double w[2] = {d == 1 ? (a == 0 ? 1.0 : -1.0) : std::cos(kTwoPi * a / na), std::sin(kTwoPi * a / na)};
      double bw = 0.0, q = 0.0;
      for (int i = 0; i < d; i++)
      {
        bw += p.beta[i] * w[i];
        for (int j = 0; j < d; j++)
          q += p.hinv[i * d + j] * w[i] * w[j];
      }
      const double r = 1.0 / (bw + p.N * std::sqrt(q));
      vol += std::pow(r, d) / d * (d == 1 ? 1.0 : kTwoPi / na) * g.cell_volume();
    }
  }
  return vol;
}

}  // namespace

TEST(ModelConfig, RejectsOneDimensionalSpacetime)
{
  EXPECT_NE(config_error({{"n", 1}, {"lengths", json::array()}}), "");
}

TEST(ModelConfig, PPWaveWithoutAlphaNamesTheField)
{
  const std::string msg =
      config_error({{"n", 3}, {"family", "ppwave"}, {"lengths", {kTwoPi}}, {"H", "1.1"}, {"L", 4.0}});
  EXPECT_NE(msg.find("alpha"), std::string::npos) << msg;
}

TEST(ModelConfig, UnknownKeysAndBadExpressionsRejected)
{
  EXPECT_NE(config_error({{"n", 2}, {"lengths", {kTwoPi}}, {"lapse_typo", 1}}), "");
  EXPECT_NE(config_error({{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "1+cos("}}), "");
  EXPECT_NE(config_error({{"n", 2}, {"lengths", {-1.0}}}), "");
  // Lapse must stay positive.
  EXPECT_NE(config_error({{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "0.5*cos(x)"}}), "");
}

TEST(ModelGeometry, StaticConformalMetricIsConformallyFlat)
{
  const StationaryModel m =
      build_model({{"n", 3}, {"family", "static_conformal"}, {"lengths", {kTwoPi, kTwoPi}}, {"lapse", "1+0.2*cos(x)"}});
  const double x[2] = {0.4, 1.3};
  const PointGeometry g = m.geometry_at(x);
  const double N = 1 + 0.2 * std::cos(0.4);
  EXPECT_NEAR(g.N, N, 1e-14);
  EXPECT_NEAR(g.h[0], N * N, 1e-13);
  EXPECT_NEAR(g.h[1], 0.0, 1e-14);
  EXPECT_NEAR(g.hinv[3], 1.0 / (N * N), 1e-13);
}

TEST(ModelGeometry, ShiftIsRaisedWithTheInverseMetric)
{
  const StationaryModel m = build_model({{"n", 3},
                                         {"lengths", {kTwoPi, kTwoPi}},
                                         {"metric", json::array({json::array({"2", "0.5"}), json::array({"0.5", "1"})})},
                                         {"shift", {"0.2", "0.1"}}});
  const double x[2] = {0.0, 0.0};
  const PointGeometry g = m.geometry_at(x);
  // h^{-1} = [[1, -0.5], [-0.5, 2]] / 1.75
  EXPECT_NEAR(g.beta[0], (0.2 - 0.05) / 1.75, 1e-14);
  EXPECT_NEAR(g.beta[1], (-0.1 + 0.2) / 1.75, 1e-14);
}

TEST(PhaseSpaceVolume, ClosedFormsForConstantModels)
{
  const StationaryModel circle = build_model({{"n", 2}, {"lengths", {kTwoPi}}});
  EXPECT_NEAR(phase_space_volume(circle, SpectralGrid({16}, circle.lengths)), 2 * kTwoPi, 1e-12);

  // H = b xi + |xi| on a circle: the ball is [-1/(1-b), 1/(1+b)] per point.
  const double b = 0.3;
  const StationaryModel shifted = build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"shift", {b}}});
  EXPECT_NEAR(phase_space_volume(shifted, SpectralGrid({16}, shifted.lengths)),
              kTwoPi * (1 / (1 - b) + 1 / (1 + b)), 1e-12);

  const StationaryModel torus = build_model({{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}});
  EXPECT_NEAR(phase_space_volume(torus, SpectralGrid({8, 8}, torus.lengths)), std::numbers::pi * kTwoPi * kTwoPi,
              1e-10);
}

class VolumeAgainstPolarFormula : public ::testing::TestWithParam<json>
{
};

TEST_P(VolumeAgainstPolarFormula, AgreesAndSatisfiesResidueIdentity)
{
  const StationaryModel m = build_model(GetParam());
  const SpectralGrid g(std::vector<int>(static_cast<std::size_t>(m.d()), 64), m.lengths);
  const double vol = phase_space_volume(m, g);
  EXPECT_NEAR(polar_volume(m, 96, 192) / vol, 1.0, 1e-10);
  EXPECT_NEAR(symplectic_residue(m, g) / ((m.n - 1) * polar_volume(m, 96, 192)), 1.0, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(
    Models, VolumeAgainstPolarFormula,
    ::testing::Values(json{{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "1+0.2*cos(x)"}, {"shift", {"0.3*sin(x)"}}},
                      json{{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}, {"lapse", "1+0.3*cos(x)"}, {"shift", {"0.2", "0"}}},
                      json{{"n", 3},
                           {"family", "ppwave"},
                           {"lengths", {kTwoPi}},
                           {"H", "1.15+0.1*cos(y)"},
                           {"L", 4.0},
                           {"alpha", 1.0}}));

TEST(Factorizability, ConstantModelsFactorizeAndNonKillingShiftDoesNot)
{
  for (const json &cfg : {json{{"n", 2}, {"lengths", {kTwoPi}}, {"shift", {"0.3"}}},
                          json{{"n", 3}, {"lengths", {kTwoPi, 3.0}}, {"potential", -1.0}}})
  {
    const StationaryModel m = build_model(cfg);
    const FactorizabilityReport r =
        check_factorizability(m, SpectralGrid(std::vector<int>(static_cast<std::size_t>(m.d()), 24), m.lengths));
    EXPECT_LT(r.defect, 1e-12);
    EXPECT_TRUE(r.is_factorizable);
  }
  const StationaryModel crafted =
      build_model({{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}, {"lapse", "1+0.3*cos(x)"}, {"shift", {"0.2", "0"}}});
  const FactorizabilityReport r = check_factorizability(crafted, SpectralGrid({24, 24}, crafted.lengths));
  EXPECT_GT(r.defect, 1e-3);
  EXPECT_FALSE(r.is_factorizable);
}
