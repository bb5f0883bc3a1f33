// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include <random>
#include "kgspec/config.hpp"
#include "kgspec/discretization.hpp"
#include "kgspec/errors.hpp"
#include "kgspec/io.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const json kCircle = {{"n", 2}, {"lengths", {kTwoPi}}};

std::string config_error(const json &j)
{
  try
  {
    parse_config_json(j);
  }
  catch (const ConfigError &e)
  {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Format, ShortestRoundTrip)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 2000; i++)
  {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Format, ContentHashIsFnv1a)
{
  EXPECT_EQ(hex64(content_hash("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(content_hash("a")), "af63dc4c8601ec8c");
}

TEST(Csv, SpectrumRoundTripsIntoTheTraceInput)
{
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"potential", -2.0}});
  const SpectrumResult s = solve_spectrum(assemble(m, SpectralGrid({32}, m.lengths)));
  const std::string csv = spectrum_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "re_lambda,im_lambda,multiplicity,residual,trusted");
  const TraceInput a = trace_input(s), b = trace_input_from_csv(csv, s.lambda_cutoff);
  ASSERT_EQ(a.complex_modes.size(), b.complex_modes.size());
  double wa = 0, wb = 0;
  for (const SpectralLine &l : a.lines)
    wa += l.weight * std::cos(l.lambda);
  for (const SpectralLine &l : b.lines)
    wb += l.weight * std::cos(l.lambda);
  EXPECT_NEAR(wa, wb, 1e-9);
}

TEST(Csv, OrbitTableRoundTrips)
{
  PeriodicOrbit o;
  o.period = 2 * kTwoPi;
  o.primitive_period = kTwoPi;
  o.winding = {2, -1};
  o.det_I_minus_P = -2.5;
  o.stability = "hyperbolic";
  o.closure_defect = 3e-12;
  const std::string csv = orbits_csv({o});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "period,primitive_period,winding_1,winding_2,det_I_minus_P,stability,closure_defect");
  const auto back = orbits_from_csv(csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].period, o.period);
  EXPECT_EQ(back[0].winding, o.winding);
  EXPECT_EQ(back[0].repetition, 2);
  EXPECT_EQ(back[0].stability, "hyperbolic");
  EXPECT_EQ(orbits_csv(back), csv);
}

TEST(Config, DefaultsAreFilled)
{
  const RunConfig c = parse_config_json({{"model", {{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}}}});
  EXPECT_EQ(c.grid, (std::vector<int>{64, 64}));
  EXPECT_DOUBLE_EQ(c.Lambda, 16.0);
  EXPECT_DOUBLE_EQ(c.solver.tol_resid, 1e-7);
  EXPECT_EQ(c.stages, std::vector<Stage>{Stage::Spectrum});
  EXPECT_TRUE(c.cache);
}

TEST(Config, SchemaErrorsCarryPointers)
{
  EXPECT_NE(config_error({{"model", {{"n", 1}, {"lengths", json::array()}}}}).find("/model"), std::string::npos);
  const std::string alpha = config_error(
      {{"model", {{"n", 3}, {"family", "ppwave"}, {"lengths", {kTwoPi}}, {"H", "1.1"}, {"L", 4.0}}}});
  EXPECT_NE(alpha.find("alpha"), std::string::npos) << alpha;
  EXPECT_NE(config_error({{"model", kCircle}, {"trace", {{"Lambdaa", 3}}}}).find("/trace/Lambdaa"),
            std::string::npos);
  EXPECT_NE(config_error({{"model", kCircle}, {"grid", {64, 64}}}).find("/grid"), std::string::npos);
  EXPECT_NE(config_error({{"model", kCircle}, {"stages", {"spectrum", "bogus"}}}).find("/stages/1"),
            std::string::npos);
  EXPECT_NE(config_error({{"model", kCircle}, {"tolerances", {{"tol_resid", -1}}}}).find("/tolerances/tol_resid"),
            std::string::npos);
  EXPECT_NE(config_error({{"grid", {8}}}).find("/model"), std::string::npos);
}

TEST(Config, StageClosureAddsPrerequisitesInOrder)
{
  EXPECT_EQ(stage_closure({Stage::Trace}), (std::vector<Stage>{Stage::Spectrum, Stage::Orbits, Stage::Trace}));
  EXPECT_EQ(stage_closure({Stage::Forms, Stage::Weyl}),
            (std::vector<Stage>{Stage::Spectrum, Stage::Weyl, Stage::Forms}));
  EXPECT_EQ(parse_stage(stage_name(Stage::Verify)), Stage::Verify);
}

TEST(Config, CanonicalFormIgnoresOutputAndCachePolicy)
{
  RunConfig a = parse_config_json({{"model", kCircle}, {"output", "x"}, {"cache", false}, {"threads", 4}});
  RunConfig b = parse_config_json({{"model", kCircle}});
  EXPECT_EQ(a.canonical(), b.canonical());
  RunConfig c = parse_config_json({{"model", kCircle}, {"tolerances", {{"tol_resid", 1e-6}}}});
  EXPECT_NE(c.canonical(), b.canonical());
}
