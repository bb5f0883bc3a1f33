// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include "kgspec/discretization.hpp"
#include "kgspec/model.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST(FourierDiff, ExactOnResolvedTrigPolynomials)
{
  for (int M : {16, 18})
  {
    const double L = 3.0;
    const Eigen::MatrixXd D = fourier_diff_matrix(M, L);
    Eigen::VectorXd u(M), du(M);
    for (int j = 0; j < M; j++)
    {
      const double x = L * j / M, w = kTwoPi / L;
      u[j] = std::sin(3 * w * x) + 0.5 * std::cos(2 * w * x);
      du[j] = 3 * w * std::cos(3 * w * x) - w * std::sin(2 * w * x);
    }
    EXPECT_LT((D * u - du).cwiseAbs().maxCoeff(), 1e-12) << M;
  }
}

TEST(Assembly, PencilCoefficientsHaveTheWeightedSymmetries)
{
  const StationaryModel m = build_model({{"n", 3},
                                         {"lengths", {kTwoPi, kTwoPi}},
                                         {"lapse", "1+0.2*cos(x)*sin(y)"},
                                         {"shift", {"0.2*sin(y)", "0.1*cos(x)"}},
                                         {"potential", "0.3+0.1*cos(x+y)"}});
  const OperatorMatrices mats = assemble(m, SpectralGrid({12, 10}, m.lengths));
  const Eigen::MatrixXd WP = mats.weights.asDiagonal() * mats.P;
  const Eigen::MatrixXd WX = mats.weights.asDiagonal() * mats.X;
  EXPECT_LT((WP - WP.transpose()).norm() / WP.norm(), 1e-13);
  EXPECT_LT((WX + WX.transpose()).norm() / WX.norm(), 1e-13);
  EXPECT_FALSE(mats.x_is_zero());
  EXPECT_GT(mats.lambda_cutoff, 0.0);
}

TEST(Assembly, EvenGridHasOnlyTheConstantKernel)
{
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}});
  const OperatorMatrices mats = assemble(m, SpectralGrid({32}, m.lengths));
  const Eigen::VectorXd w = mats.weights.cwiseSqrt();
  const Eigen::MatrixXd S = w.asDiagonal() * mats.P * w.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  int zeros = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); i++)
    zeros += std::abs(es.eigenvalues()[i]) < 1e-9 ? 1 : 0;
  EXPECT_EQ(zeros, 1);
  // The resolved part of the symbol is k^2.
  EXPECT_NEAR(es.eigenvalues()[1], 1.0, 1e-10);
  EXPECT_NEAR(es.eigenvalues()[3], 4.0, 1e-10);
}

TEST(Assembly, CutoffGrowsWithResolution)
{
  const StationaryModel m = build_model({{"n", 2}, {"lengths", {kTwoPi}}, {"lapse", "1+0.1*cos(x)"}});
  const double c32 = lambda_cutoff(m, SpectralGrid({32}, m.lengths), 1.0 / 3.0);
  const double c64 = lambda_cutoff(m, SpectralGrid({64}, m.lengths), 1.0 / 3.0);
  EXPECT_NEAR(c64 / c32, 2.0, 1e-12);
}
