// SPDX-License-Identifier: Apache-2.0
//
// x-independent pp-wave quotients. A Floquet mode e^{i (2 pi m + L lambda) x/(alpha L)} phi(y)
// reduces the pencil to
//
//   (-Delta_y + V(lambda, y, m)) phi = 0,
//   V = ((2 pi m + L lambda)^2 / (alpha L)^2) H(y) - (2 lambda / (alpha L)) (2 pi m + L lambda),
//
// a quadratic pencil K0 + lambda K1 + lambda^2 K2 on the base torus S.

#pragma once

#include <vector>
#include <Eigen/Dense>
#include "kgspec/model.hpp"
#include "kgspec/pencil.hpp"

namespace kgspec
{

struct ReducedPencil
{
  Eigen::MatrixXd K0;  // -Delta_y + a^2 H / alpha^2, a = 2 pi m / L
  Eigen::VectorXd K1;  // diagonal: 2 a (H - alpha) / alpha^2
  Eigen::VectorXd K2;  // diagonal: (H - 2 alpha) / alpha^2, negative
};

const PPWaveParams &ppwave_params(const StationaryModel &model);

ReducedPencil ppwave_reduced_pencil(const StationaryModel &model, const SpectralGrid &base, int m);

// Trust cutoff of the reduced solve: fraction * min_i(pi M_i / L_i) * sqrt(min H).
double ppwave_cutoff(const StationaryModel &model, const SpectralGrid &base, double fraction);

// Largest |m| whose branch can reach |lambda| <= lambda_max.
int ppwave_max_branch(const StationaryModel &model, const SpectralGrid &base, double lambda_max);

// Full Floquet spectrum: union over m of the reduced pencil eigenvalues.
SpectrumResult ppwave_spectrum(const StationaryModel &model, const SpectralGrid &base,
                               const SolverOptions &opts = {});

// Eigenvalues of one reduced pencil (residual-filtered, unsorted).
std::vector<EigenMode> ppwave_branch_modes(const StationaryModel &model, const SpectralGrid &base, int m,
                                           const SolverOptions &opts);

// F_m(lambda): eigenvalue of -Delta_y + V(lambda, ., m) closest to zero.
double ppwave_branch_function(const StationaryModel &model, const SpectralGrid &base, int m, double lambda);

struct BranchScanReport
{
  std::vector<double> roots;
  int sign_changes = 0;
  int rejected = 0;  // sign changes that were jumps between eigenvalues, not zeros
};

// Roots of F_m in [lo, hi] by sign-change scanning and TOMS 748 refinement.
BranchScanReport ppwave_branch_solve(const StationaryModel &model, const SpectralGrid &base, int m, double lo,
                                     double hi, int scan_points = 400);

// lambda = 2 pi m / L for |m| <= mmax.
std::vector<double> ppwave_constant_family(const StationaryModel &model, int mmax);

}  // namespace kgspec
