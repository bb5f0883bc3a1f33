// SPDX-License-Identifier: Apache-2.0
//
// Thin wrappers over the LAPACK dense eigensolvers. All inputs are copied; the
// wrappers throw NumericalError when a routine reports failure.

#pragma once

#include <Eigen/Dense>

namespace kgspec
{

// Compares a BLAS dgemm against Eigen's own product on 256 x 256 problems.
// Some OpenBLAS builds pick a kernel for the detected CPU that returns wrong
// results under virtualization; every wrapper below refuses to run then.
bool blas_is_sound();

// For executables: if the BLAS check fails and OPENBLAS_CORETYPE is unset,
// re-executes the current binary with OPENBLAS_CORETYPE=Haswell. Returns only
// when the BLAS is sound or the re-exec was not possible.
void ensure_sound_blas(char **argv);

struct EigenDecomposition
{
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // right eigenvectors, columns; empty if not requested
};

// zgeev
EigenDecomposition eig_general(const Eigen::MatrixXcd &A, bool want_vectors);

// dgeev on a real matrix; complex pairs are expanded into complex columns.
EigenDecomposition eig_general_real(const Eigen::MatrixXd &A, bool want_vectors);

// zggev: A v = mu B v. Eigenvalues with |beta| ~ 0 are returned as infinity.
EigenDecomposition eig_generalized(const Eigen::MatrixXcd &A, const Eigen::MatrixXcd &B,
                                   bool want_vectors);

struct SymmetricDecomposition
{
  Eigen::VectorXd values;  // ascending
  Eigen::MatrixXd vectors;
};

// dsyevd
SymmetricDecomposition eig_symmetric(const Eigen::MatrixXd &A, bool want_vectors);

}  // namespace kgspec
