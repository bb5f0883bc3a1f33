// SPDX-License-Identifier: Apache-2.0
//
// Fourier collocation on the torus grid. The stiffness part of P is assembled
// in the symmetric form
//
//   diag(w) P = sum_ij D_i^T diag(w htilde^{ij}) D_j + Nyquist penalty + diag(w W),
//
// with w = |htilde|^{1/2} * cell volume, so P is self-adjoint in the weighted
// inner product by construction and X is skew-adjoint the same way.

#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>
#include "kgspec/grid.hpp"
#include "kgspec/model.hpp"

namespace kgspec
{

Eigen::MatrixXd fourier_diff_matrix(int M, double L);

// Per-axis differentiation on the tensor grid, applied without forming the
// Kronecker products.
class TensorDiff
{
public:
  explicit TensorDiff(const SpectralGrid &grid);

  const SpectralGrid &grid() const { return grid_; }
  const Eigen::MatrixXd &axis_matrix(int axis) const { return D_[axis]; }

  Eigen::VectorXd derivative(int axis, const Eigen::VectorXd &u) const;
  Eigen::VectorXcd derivative(int axis, const Eigen::VectorXcd &u) const;

  // Dense sum_ij D_i^T diag(coef_ij) D_j (+ penalty on each axis' Nyquist
  // projector). coef holds d*d values per node, node-major.
  Eigen::MatrixXd stiffness(const std::vector<double> &coef, const std::vector<double> &penalty) const;
  Eigen::VectorXd apply_stiffness(const std::vector<double> &coef, const std::vector<double> &penalty,
                                  const Eigen::VectorXd &u) const;

  // Dense 1/2 diag(1/w) sum_i (diag(a_i) D_i + D_i diag(a_i)).
  Eigen::MatrixXd skew_first_order(const std::vector<double> &a, const Eigen::VectorXd &w) const;

  // Fraction of the discrete l2 energy carried by Fourier modes with some
  // |k_i| > M_i / 3, one value per column.
  Eigen::VectorXd tail_fractions(const Eigen::MatrixXcd &vectors) const;

  // Zeroes Fourier content with some |k_i| > M_i / 3 (2/3 rule).
  Eigen::VectorXd two_thirds_filter(const Eigen::VectorXd &u) const;

private:
  SpectralGrid grid_;
  std::vector<Eigen::MatrixXd> D_;
};

struct DiscretizationOptions
{
  bool nyquist_penalty = true;
  bool dealias = false;
  double cutoff_fraction = 1.0 / 3.0;
};

struct OperatorMatrices
{
  SpectralGrid grid;
  ReducedGeometry geom;
  Eigen::MatrixXd P;         // real; self-adjoint in diag(weights)
  Eigen::MatrixXd X;         // real; skew-adjoint in diag(weights); empty when beta == 0
  Eigen::MatrixXd stiffness;  // diag(weights) P without the W part
  Eigen::VectorXd weights;   // |htilde|^{1/2} * cell volume
  Eigen::MatrixXd q1;        // energy form, gradient + potential block
  Eigen::VectorXd q2;        // energy form, time-derivative block (diagonal)
  Eigen::VectorXd h_weights;  // sqrt|h| * cell volume
  double lambda_cutoff = 0.0;
  bool has_shift = false;

  bool x_is_zero() const { return X.size() == 0; }
};

// Penalty per axis: (pi M_i / L_i)^2 times the mean of coef_ii, so Nyquist
// modes land near the top of the resolved band instead of in the kernel.
std::vector<double> nyquist_penalty(const SpectralGrid &grid, const std::vector<double> &coef);

// W = Omega^{-1} (Delta_disc Omega) + N^2 V with the same discrete Laplacian
// (and the same filtering) that assemble_P uses.
std::vector<double> reduced_potential(const ReducedGeometry &geom, const TensorDiff &diff,
                                      const DiscretizationOptions &opts);

// Building blocks, exposed for tests.
Eigen::MatrixXd assemble_P(const ReducedGeometry &geom, const TensorDiff &diff,
                           const DiscretizationOptions &opts = {});
Eigen::MatrixXd assemble_X(const ReducedGeometry &geom, const TensorDiff &diff);
void assemble_energy_forms(const ReducedGeometry &geom, const TensorDiff &diff,
                           const DiscretizationOptions &opts, Eigen::MatrixXd &q1,
                           Eigen::VectorXd &q2);

OperatorMatrices assemble(const StationaryModel &model, const SpectralGrid &grid,
                          const DiscretizationOptions &opts = {});

double lambda_cutoff(const StationaryModel &model, const SpectralGrid &grid, double fraction);

// Little-endian binary dump: "KGSM" magic, uint32 version, uint32 count, then
// per matrix: uint32 name length, name bytes, uint64 rows, uint64 cols and a
// row-major payload of (re, im) double pairs.
void dump_matrices(const std::string &path, const OperatorMatrices &mats);

}  // namespace kgspec
