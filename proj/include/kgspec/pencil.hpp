// SPDX-License-Identifier: Apache-2.0
//
// The quadratic pencil (P - 2 i lambda X - lambda^2) psi = 0 and its solvers.

#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>
#include <Eigen/Dense>
#include "kgspec/discretization.hpp"
#include "kgspec/model.hpp"

namespace kgspec
{

using cplx = std::complex<double>;

struct EigenMode
{
  cplx lambda;
  Eigen::VectorXcd psi;  // unit norm in the volume weights; empty unless kept
  double residual = 0.0;
  double tail_fraction = 0.0;
  bool trusted = false;
};

struct ModeGroup
{
  cplx lambda;
  int multiplicity = 0;
};

struct JordanReport
{
  int algebraic = 0;
  int geometric = 0;
  bool ill_conditioned = false;
};

struct SymmetryReport
{
  double reflection_defect = 0.0;   // lambda -> -lambda
  double conjugation_defect = 0.0;  // lambda -> conj(lambda)
  int multiplicity_mismatches = 0;
  bool quadruples_ok = true;
};

enum class Route
{
  Auto,
  Companion,
  Symmetric,
  Fourier
};

std::string route_name(Route r);

struct SolverOptions
{
  double tol_resid = 1e-7;
  double cluster_tol = 1e-6;  // scaled by (1 + |lambda|)
  double tol_zero = 1e-6;
  double tol_real = 1e-7;
  double tol_tail = 0.01;
  double cutoff_fraction = 1.0 / 3.0;
  Route route = Route::Auto;
  bool cross_check = true;
  int cross_check_max_size = 1024;  // doubled order above which the (A,B) route is skipped
  bool keep_vectors = true;         // eigenvectors of trusted modes
};

struct SpectrumResult
{
  std::vector<EigenMode> modes;  // residual-filtered, sorted by (Re, Im)
  std::vector<ModeGroup> groups;  // trusted modes only
  JordanReport jordan_at_zero;
  SymmetryReport symmetry;
  std::vector<std::size_t> complex_modes;  // indices into modes (trusted, |Im| > tol_real)
  double lambda_cutoff = 0.0;
  std::string route;
  double cross_check_discrepancy = -1.0;  // < 0 when not run
  int cross_check_compared = 0;
  std::size_t candidates = 0;  // eigenvalues before the residual filter

  std::vector<cplx> trusted_values() const;  // with multiplicity
};

// [0, I; P, -2iX] acting on (psi, lambda psi).
Eigen::MatrixXcd companion_linearize(const Eigen::MatrixXd &P, const Eigen::MatrixXd &X);

// A = (2iX, P - 1; P - 1, 2iX), B = (P, 0; 0, 1), both multiplied by the
// volume weights so that they are Hermitian. A v = mu B v with
// mu = 1/lambda - lambda and v = (lambda' psi, psi), lambda' = -1/lambda.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> selfadjoint_linearize(const Eigen::MatrixXd &P,
                                                                    const Eigen::MatrixXd &X,
                                                                    const Eigen::VectorXd &weights);

// Roots of lambda^2 + mu lambda - 1 = 0.
std::pair<cplx, cplx> mu_to_lambda(cplx mu);

// ||(P - 2 i lambda X - lambda^2) psi|| / ||psi|| in the weighted norm.
double pencil_residual(const Eigen::MatrixXd &P, const Eigen::MatrixXd &X, const Eigen::VectorXd &weights,
                       cplx lambda, const Eigen::VectorXcd &psi);

// Drops modes whose recomputed residual exceeds tol_resid; updates residuals.
std::vector<EigenMode> residual_filter(const Eigen::MatrixXd &P, const Eigen::MatrixXd &X,
                                       const Eigen::VectorXd &weights, std::vector<EigenMode> modes,
                                       double tol_resid);

JordanReport detect_jordan_zero(const OperatorMatrices &mats, const SolverOptions &opts = {});

SpectrumResult solve_spectrum(const OperatorMatrices &mats, const SolverOptions &opts = {});

// Constant-coefficient models: each plane wave e^{i k x} decouples and
// lambda solves lambda^2 - 2 (beta.k) lambda - p(k) = 0. No matrices are formed.
SpectrumResult solve_spectrum_fourier(const StationaryModel &model, const SpectralGrid &grid,
                                      const SolverOptions &opts = {});

// Grouping, symmetry report and complex-mode bookkeeping for a list of
// modes whose trusted flags are set. Shared by every route.
void finalize_spectrum(SpectrumResult &res, const SolverOptions &opts);

// Max distance between the real parts of a and b after sorting, with both
// lists matched one-to-one; infinity if the sizes differ.
double max_matched_distance(std::vector<double> a, std::vector<double> b);

}  // namespace kgspec
