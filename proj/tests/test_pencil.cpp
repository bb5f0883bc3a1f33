// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include <Eigen/Eigenvalues>
#include "kgspec/discretization.hpp"
#include "kgspec/pencil.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> real_parts(const SpectrumResult &s, double below)
{
  std::vector<double> out;
  for (cplx z : s.trusted_values())
  {
    EXPECT_LT(std::abs(z.imag()), 1e-7);
    if (std::abs(z.real()) <= below)
      out.push_back(z.real());
  }
  return out;
}

}  // namespace

TEST(Pencil, CircleSpectrumIsTheIntegersWithAJordanBlockAtZero)
{
  for (int M : {34, 40})
  {
    const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}});
    const SpectrumResult s = solve_spectrum(assemble(m, SpectralGrid({M}, m.lengths)));
    std::vector<double> expect = {0.0, 0.0};
    for (int k = 1; k <= s.lambda_cutoff; k++)
      expect.insert(expect.end(), {double(k), double(k), double(-k), double(-k)});
    EXPECT_LT(max_matched_distance(real_parts(s, 1e9), expect), 1e-9) << M;
    EXPECT_EQ(s.jordan_at_zero.algebraic, 2);
    EXPECT_EQ(s.jordan_at_zero.geometric, 1);
  }
}

TEST(Pencil, PositivePotentialRemovesTheZeroMode)
{
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"potential", 0.75}});
  const SpectrumResult s = solve_spectrum(assemble(m, SpectralGrid({32}, m.lengths)));
  EXPECT_EQ(s.jordan_at_zero.algebraic, 0);
  std::vector<double> expect;
  for (int k = -20; k <= 20; k++)
  {
    const double lam = std::sqrt(k * k + 0.75);
    if (lam <= s.lambda_cutoff)
      expect.insert(expect.end(), {lam, -lam});
  }
  EXPECT_LT(max_matched_distance(real_parts(s, 1e9), expect), 1e-9);
}

// Constant shift eta = b on the circle: modes e^{ikx} have lambda = (b +- 1) k.
TEST(Pencil, ConstantShiftMatchesTheDispersionRelation)
{
  const double b = 0.3;
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"shift", {b}}});
  SolverOptions opts;
  opts.route = Route::Companion;
  const SpectrumResult s = solve_spectrum(assemble(m, SpectralGrid({40}, m.lengths)), opts);
  const double window = 0.8 * s.lambda_cutoff;
  std::vector<double> expect = {0.0, 0.0};
  for (int k = 1; k < 100; k++)
    for (double lam : {(b + 1) * k, (b - 1) * k, -(b + 1) * k, -(b - 1) * k})
      if (std::abs(lam) <= window)
        expect.push_back(lam);
  EXPECT_LT(max_matched_distance(real_parts(s, window), expect), 1e-8);
  EXPECT_LT(s.symmetry.reflection_defect, 1e-7);
  EXPECT_LT(s.symmetry.conjugation_defect, 1e-7);
}

TEST(Pencil, FourierRouteAgreesWithCollocationOnAShiftedTorus)
{
  const StationaryModel m = build_model(
      {{"n", 3}, {"lengths", {kTwoPi, 5.0}}, {"shift", {"0.25", "-0.1"}}, {"potential", 0.4}});
  const SpectralGrid g({14, 12}, m.lengths);
  SolverOptions opts;
  opts.cross_check = false;
  const SpectrumResult a = solve_spectrum(assemble(m, g), opts);
  const SpectrumResult f = solve_spectrum_fourier(m, g, opts);
  const double window = 0.7 * std::min(a.lambda_cutoff, f.lambda_cutoff);
  EXPECT_LT(max_matched_distance(real_parts(a, window), real_parts(f, window)), 1e-8);
}

TEST(Pencil, SymmetricAndCompanionRoutesAgreeWhenXVanishes)
{
  const StationaryModel m =
      build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "1+0.2*cos(x)"}, {"potential", "0.5+0.2*cos(2*x)"}});
  const OperatorMatrices mats = assemble(m, SpectralGrid({36}, m.lengths));
  SolverOptions sym, comp;
  sym.route = Route::Symmetric;
  comp.route = Route::Companion;
  const SpectrumResult a = solve_spectrum(mats, sym), b = solve_spectrum(mats, comp);
  const double window = 0.9 * a.lambda_cutoff;
  EXPECT_LT(max_matched_distance(real_parts(a, window), real_parts(b, window)), 1e-8);
}

TEST(Pencil, DoubledPencilCrossCheckAgreesWithCompanion)
{
  const StationaryModel m = build_model(
      {{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "1+0.2*cos(x)"}, {"shift", {"0.3*sin(x)"}}});
  SolverOptions opts;
  opts.cross_check = true;
  const SpectrumResult s = solve_spectrum(assemble(m, SpectralGrid({32}, m.lengths)), opts);
  ASSERT_GT(s.cross_check_compared, 0);
  EXPECT_LT(s.cross_check_discrepancy, 1e-7);
}

TEST(Pencil, NegativePotentialProducesImaginaryQuadruples)
{
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"potential", -2.0}});
  const SpectrumResult s = solve_spectrum(assemble(m, SpectralGrid({32}, m.lengths)));
  // k^2 - 2 < 0 for k = 0, +-1: lambda = +-i sqrt(2), +-i (twice).
  std::vector<double> im;
  for (std::size_t k : s.complex_modes)
    im.push_back(s.modes[k].lambda.imag());
  EXPECT_LT(max_matched_distance(im, {std::sqrt(2.0), -std::sqrt(2.0), 1, 1, -1, -1}), 1e-9);
  EXPECT_TRUE(s.symmetry.quadruples_ok);
}

TEST(Pencil, CompanionLinearizationReproducesScalarRoots)
{
  // 1x1 pencil 5 - 2 i lambda - lambda^2: lambda = -i +- 2.
  Eigen::MatrixXd P(1, 1), X(1, 1);
  P << 5.0;
  X << 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion_linearize(P, X));
  std::vector<double> re, im;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); i++)
  {
    re.push_back(es.eigenvalues()[i].real());
    im.push_back(es.eigenvalues()[i].imag());
  }
  EXPECT_LT(max_matched_distance(re, {2.0, -2.0}), 1e-12);
  EXPECT_LT(max_matched_distance(im, {-1.0, -1.0}), 1e-12);
  EXPECT_EQ(max_matched_distance({1.0}, {1.0, 2.0}), std::numeric_limits<double>::infinity());
}
