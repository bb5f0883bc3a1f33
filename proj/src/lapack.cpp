// SPDX-License-Identifier: Apache-2.0

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <cblas.h>
#include <unistd.h>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <string>
#include "kgspec/errors.hpp"
#include "kgspec/lapack.hpp"

namespace kgspec
{

namespace
{

void check(lapack_int info, const char *routine, Eigen::Index n)
{
  if (info != 0)
  {
    throw NumericalError(std::string(routine) + " failed with info = " + std::to_string(info) +
                         " (matrix order " + std::to_string(n) + ")");
  }
}

void require_sound_blas()
{
  static std::once_flag once;
  static bool sound = false;
  std::call_once(once, [] { sound = blas_is_sound(); });
  if (!sound)
  {
    throw NumericalError(
        "the BLAS library returns wrong matrix products on this CPU; "
        "rerun with OPENBLAS_CORETYPE=Haswell (or another kernel that passes)");
  }
}

}  // namespace

bool blas_is_sound()
{
  const int n = 256;
  Eigen::MatrixXd A(n, n), B(n, n), C(n, n);
  for (int j = 0; j < n; j++)
  {
    for (int i = 0; i < n; i++)
    {
      A(i, j) = std::sin(0.37 * i + 1.3 * j);
      B(i, j) = std::cos(0.11 * i - 0.7 * j);
    }
  }
  cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, n, 1.0, A.data(), n, B.data(), n, 0.0, C.data(), n);
  const Eigen::MatrixXd ref = A.lazyProduct(B);
  if (!((C - ref).norm() <= 1e-10 * (1.0 + ref.norm())))
  {
    return false;
  }
  const Eigen::MatrixXcd Az = A.cast<std::complex<double>>() * std::complex<double>(0.6, 0.8);
  const Eigen::MatrixXcd Bz = B.cast<std::complex<double>>();
  Eigen::MatrixXcd Cz(n, n);
  const std::complex<double> one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, n, &one, Az.data(), n, Bz.data(), n, &zero,
              Cz.data(), n);
  const Eigen::MatrixXcd refz = Az.lazyProduct(Bz);
  return (Cz - refz).norm() <= 1e-10 * (1.0 + refz.norm());
}

void ensure_sound_blas(char **argv)
{
  if (blas_is_sound() || std::getenv("OPENBLAS_CORETYPE") != nullptr)
  {
    return;
  }
  setenv("OPENBLAS_CORETYPE", "Haswell", 1);
  execv("/proc/self/exe", argv);
}

EigenDecomposition eig_general(const Eigen::MatrixXcd &A, bool want_vectors)
{
  require_sound_blas();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::MatrixXcd a = A;
  EigenDecomposition out;
  out.values.resize(n);
  if (want_vectors)
  {
    out.vectors.resize(n, n);
  }
  std::complex<double> dummy;
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, out.values.data(),
                    &dummy, 1, want_vectors ? out.vectors.data() : &dummy, want_vectors ? n : 1);
  check(info, "zgeev", n);
  return out;
}

EigenDecomposition eig_general_real(const Eigen::MatrixXd &A, bool want_vectors)
{
  require_sound_blas();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::MatrixXd a = A;
  Eigen::VectorXd wr(n), wi(n);
  Eigen::MatrixXd vr;
  if (want_vectors)
  {
    vr.resize(n, n);
  }
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n,
                                        wr.data(), wi.data(), &dummy, 1,
                                        want_vectors ? vr.data() : &dummy, want_vectors ? n : 1);
  check(info, "dgeev", n);
  EigenDecomposition out;
  out.values.resize(n);
  for (lapack_int k = 0; k < n; k++)
  {
    out.values[k] = {wr[k], wi[k]};
  }
  if (want_vectors)
  {
    out.vectors.resize(n, n);
    for (lapack_int k = 0; k < n; k++)
    {
      if (wi[k] != 0.0 && k + 1 < n)
      {
        for (lapack_int r = 0; r < n; r++)
        {
          out.vectors(r, k) = {vr(r, k), vr(r, k + 1)};
          out.vectors(r, k + 1) = {vr(r, k), -vr(r, k + 1)};
        }
        k++;
      }
      else
      {
        out.vectors.col(k) = vr.col(k).cast<std::complex<double>>();
      }
    }
  }
  return out;
}

EigenDecomposition eig_generalized(const Eigen::MatrixXcd &A, const Eigen::MatrixXcd &B, bool want_vectors)
{
  require_sound_blas();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::MatrixXcd a = A, b = B;
  Eigen::VectorXcd alpha(n), beta(n);
  EigenDecomposition out;
  if (want_vectors)
  {
    out.vectors.resize(n, n);
  }
  std::complex<double> dummy;
  const lapack_int info =
      LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n, b.data(), n,
                    alpha.data(), beta.data(), &dummy, 1, want_vectors ? out.vectors.data() : &dummy,
                    want_vectors ? n : 1);
  check(info, "zggev", n);
  out.values.resize(n);
  const double inf = std::numeric_limits<double>::infinity();
  for (lapack_int k = 0; k < n; k++)
  {
    if (std::abs(beta[k]) <= 1e-14 * std::abs(alpha[k]) || beta[k] == 0.0)
    {
      out.values[k] = {inf, 0.0};
    }
    else
    {
      out.values[k] = alpha[k] / beta[k];
    }
  }
  return out;
}

SymmetricDecomposition eig_symmetric(const Eigen::MatrixXd &A, bool want_vectors)
{
  require_sound_blas();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  SymmetricDecomposition out;
  out.vectors = 0.5 * (A + A.transpose());
  out.values.resize(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'U', n, out.vectors.data(), n, out.values.data());
  check(info, "dsyevd", n);
  if (!want_vectors)
  {
    out.vectors.resize(0, 0);
  }
  return out;
}

}  // namespace kgspec
