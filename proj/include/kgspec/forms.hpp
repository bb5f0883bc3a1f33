// SPDX-License-Identifier: Apache-2.0
//
// Symplectic and energy forms on discretized Cauchy data at t = 0.
//
// A pencil mode psi with eigenvalue lambda is the solution u = e^{i lambda t} Omega^{-1} psi,
// so D_Z u = -i d/dt u = lambda u. Its data are
//
//   g = Omega^{-1} psi,   dt = i lambda g,   nu = N^{-1} (dt - beta^i d_i g),
//
// with nu the derivative along the future unit normal.

#pragma once

#include <vector>
#include <Eigen/Dense>
#include "kgspec/discretization.hpp"
#include "kgspec/pencil.hpp"

namespace kgspec
{

struct CauchyData
{
  Eigen::VectorXcd g;   // u on the slice
  Eigen::VectorXcd dt;  // d/dt u
  Eigen::VectorXcd nu;  // normal derivative
  cplx lambda = 0.0;    // D_Z eigenvalue of the generating mode
  int mode_index = -1;  // index into SpectrumResult::modes, -1 if not from a mode
  double normalization = 1.0;  // weighted norm of psi before the data were built
};

CauchyData cauchy_data(const OperatorMatrices &mats, const EigenMode &mode, int mode_index = -1);

// Data of an arbitrary solution slice from (g, d/dt u).
CauchyData cauchy_data_from(const OperatorMatrices &mats, const Eigen::VectorXcd &g,
                            const Eigen::VectorXcd &dt);

CauchyData conjugate(const CauchyData &u);
CauchyData scaled(const CauchyData &u, cplx c);
CauchyData apply_dz(const CauchyData &u);  // multiplication by lambda on mode data
CauchyData evolve(const CauchyData &u, double t);  // e^{i t D_Z}

// sigma(u, v) = int (nu u) v - u (nu v) dVol_h. Bilinear, antisymmetric.
cplx symplectic_form_sigma(const OperatorMatrices &mats, const CauchyData &u, const CauchyData &v);

// Q(u, v) = dt_u^* q2 dt_v + g_u^* q1 g_v. Hermitian.
cplx energy_form_Q(const OperatorMatrices &mats, const CauchyData &u, const CauchyData &v);

// |Q(u,v) - (i/2) sigma(conj u, D_Z v)| / (1 + |Q(u,v)|).
double lemma_defect(const OperatorMatrices &mats, const CauchyData &u, const CauchyData &v);

struct PontryaginReport
{
  int index = 0;
  int indeterminate = 0;      // eigenvalues within tol_zero of 0
  Eigen::VectorXd eigenvalues;  // of q1 in the h-volume inner product, ascending
};

PontryaginReport pontryagin_index(const OperatorMatrices &mats, double tol_zero = 1e-6);

struct PairingViolation
{
  int j = 0, k = 0;
  cplx lambda_j, lambda_k;
  double value = 0.0;  // |sigma(u_j, u_k)| / scale
};

struct PairingReport
{
  Eigen::MatrixXcd S;  // sigma(u_j, u_k) over the selected modes
  std::vector<int> mode_indices;
  double max_offpair = 0.0;       // largest scaled |S_jk| with lambda_j + lambda_k away from 0
  double antisymmetry_defect = 0.0;  // max |S_jk + S_kj| / scale
  std::vector<PairingViolation> violations;
};

// Trusted real modes with stored eigenvectors.
std::vector<int> trusted_real_modes(const SpectrumResult &spec, double tol_real = 1e-7);

PairingReport sigma_pairing_matrix(const OperatorMatrices &mats, const SpectrumResult &spec,
                                   double tol = 1e-7, double cluster_tol = 1e-6);

struct FormsReport
{
  double lemma12_max_defect = 0.0;
  double sigma_antisymmetry_defect = 0.0;
  double time_invariance_defect = 0.0;  // Q on evolved data, equal-lambda pairs
  int pontryagin_index = 0;
  int pontryagin_indeterminate = 0;
  int modes_used = 0;
  double pairing_max_offpair = 0.0;
  std::vector<PairingViolation> pairing_violations;
};

struct FormsOptions
{
  double tol_pairing = 1e-7;
  double cluster_tol = 1e-6;
  double tol_zero = 1e-6;
  double tol_real = 1e-7;
  std::vector<double> evolve_times = {0.7, 3.1};
};

FormsReport forms_report(const OperatorMatrices &mats, const SpectrumResult &spec, const FormsOptions &opts = {});

}  // namespace kgspec
