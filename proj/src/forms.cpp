// SPDX-License-Identifier: Apache-2.0

#include "kgspec/forms.hpp"

#include <algorithm>
#include <cmath>
#include "kgspec/errors.hpp"
#include "kgspec/lapack.hpp"

namespace kgspec
{

namespace
{

const cplx kI(0.0, 1.0);

void check_size(const OperatorMatrices &mats, const CauchyData &u)
{
  const auto n = static_cast<Eigen::Index>(mats.grid.size());
  if (u.g.size() != n || u.dt.size() != n || u.nu.size() != n)
  {
    throw NumericalError("Cauchy data do not live on the operator grid");
  }
}

// nu = N^{-1} (dt - beta^i d_i g)
Eigen::VectorXcd normal_derivative(const OperatorMatrices &mats, const TensorDiff &diff, const Eigen::VectorXcd &g,
                                   const Eigen::VectorXcd &dt)
{
  const ReducedGeometry &geom = mats.geom;
  Eigen::VectorXcd nu = dt;
  if (mats.has_shift)
  {
    for (int i = 0; i < geom.d; i++)
    {
      const Eigen::VectorXcd dg = diff.derivative(i, g);
      for (std::size_t p = 0; p < geom.size; p++)
      {
        nu[static_cast<Eigen::Index>(p)] -= geom.beta[p * geom.d + i] * dg[static_cast<Eigen::Index>(p)];
      }
    }
  }
  for (std::size_t p = 0; p < geom.size; p++)
  {
    nu[static_cast<Eigen::Index>(p)] /= geom.N[p];
  }
  return nu;
}

struct DataColumns
{
  Eigen::MatrixXcd G, DT, NU;
  Eigen::VectorXcd lambda;
};

DataColumns data_columns(const OperatorMatrices &mats, const SpectrumResult &spec, const std::vector<int> &idx)
{
  const auto n = static_cast<Eigen::Index>(mats.grid.size());
  const auto m = static_cast<Eigen::Index>(idx.size());
  DataColumns c;
  c.G.resize(n, m);
  c.DT.resize(n, m);
  c.NU.resize(n, m);
  c.lambda.resize(m);
  for (Eigen::Index k = 0; k < m; k++)
  {
    const CauchyData u = cauchy_data(mats, spec.modes[static_cast<std::size_t>(idx[k])], idx[k]);
    c.G.col(k) = u.g;
    c.DT.col(k) = u.dt;
    c.NU.col(k) = u.nu;
    c.lambda[k] = u.lambda;
  }
  return c;
}

}  // namespace

CauchyData cauchy_data(const OperatorMatrices &mats, const EigenMode &mode, int mode_index)
{
  const auto n = static_cast<Eigen::Index>(mats.grid.size());
  if (mode.psi.size() != n)
  {
    throw NumericalError("mode has no stored eigenvector on this grid");
  }
  Eigen::VectorXcd g(n);
  for (Eigen::Index p = 0; p < n; p++)
  {
    g[p] = mode.psi[p] / mats.geom.Omega[static_cast<std::size_t>(p)];
  }
  CauchyData u = cauchy_data_from(mats, g, kI * mode.lambda * g);
  u.lambda = mode.lambda;
  u.mode_index = mode_index;
  u.normalization = std::sqrt(mats.weights.dot(mode.psi.cwiseAbs2()));
  return u;
}

CauchyData cauchy_data_from(const OperatorMatrices &mats, const Eigen::VectorXcd &g, const Eigen::VectorXcd &dt)
{
  const TensorDiff diff(mats.grid);
  CauchyData u;
  u.g = g;
  u.dt = dt;
  u.nu = normal_derivative(mats, diff, g, dt);
  check_size(mats, u);
  return u;
}

CauchyData conjugate(const CauchyData &u)
{
  CauchyData c = u;
  c.g = u.g.conjugate();
  c.dt = u.dt.conjugate();
  c.nu = u.nu.conjugate();
  c.lambda = -std::conj(u.lambda);
  return c;
}

CauchyData scaled(const CauchyData &u, cplx s)
{
  CauchyData c = u;
  c.g *= s;
  c.dt *= s;
  c.nu *= s;
  return c;
}

CauchyData apply_dz(const CauchyData &u)
{
  return scaled(u, u.lambda);
}

CauchyData evolve(const CauchyData &u, double t)
{
  return scaled(u, std::exp(kI * u.lambda * t));
}

cplx symplectic_form_sigma(const OperatorMatrices &mats, const CauchyData &u, const CauchyData &v)
{
  check_size(mats, u);
  check_size(mats, v);
  const Eigen::VectorXcd c = mats.h_weights.cast<cplx>();
  return (c.cwiseProduct(u.nu).cwiseProduct(v.g) - c.cwiseProduct(u.g).cwiseProduct(v.nu)).sum();
}

cplx energy_form_Q(const OperatorMatrices &mats, const CauchyData &u, const CauchyData &v)
{
  check_size(mats, u);
  check_size(mats, v);
  const cplx kinetic = u.dt.dot(mats.q2.cast<cplx>().cwiseProduct(v.dt));
  const cplx potential = u.g.dot(mats.q1.cast<cplx>() * v.g);
  return kinetic + potential;
}

double lemma_defect(const OperatorMatrices &mats, const CauchyData &u, const CauchyData &v)
{
  const cplx q = energy_form_Q(mats, u, v);
  const cplx rhs = 0.5 * kI * symplectic_form_sigma(mats, conjugate(u), apply_dz(v));
  return std::abs(q - rhs) / (1.0 + std::abs(q));
}

PontryaginReport pontryagin_index(const OperatorMatrices &mats, double tol_zero)
{
  const Eigen::VectorXd s = mats.h_weights.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd A = s.asDiagonal() * mats.q1 * s.asDiagonal();
  const SymmetricDecomposition eig = eig_symmetric(0.5 * (A + A.transpose()), false);
  PontryaginReport rep;
  rep.eigenvalues = eig.values;
  for (Eigen::Index k = 0; k < eig.values.size(); k++)
  {
    if (eig.values[k] < -tol_zero)
      rep.index++;
    else if (std::abs(eig.values[k]) <= tol_zero)
      rep.indeterminate++;
  }
  return rep;
}

std::vector<int> trusted_real_modes(const SpectrumResult &spec, double tol_real)
{
  std::vector<int> out;
  for (std::size_t k = 0; k < spec.modes.size(); k++)
  {
    const EigenMode &m = spec.modes[k];
    if (m.trusted && m.psi.size() != 0 && std::abs(m.lambda.imag()) <= tol_real)
      out.push_back(static_cast<int>(k));
  }
  return out;
}

PairingReport sigma_pairing_matrix(const OperatorMatrices &mats, const SpectrumResult &spec, double tol,
                                   double cluster_tol)
{
  PairingReport rep;
  rep.mode_indices = trusted_real_modes(spec);
  const DataColumns c = data_columns(mats, spec, rep.mode_indices);
  const Eigen::VectorXcd w = mats.h_weights.cast<cplx>();
  rep.S = c.NU.transpose() * w.asDiagonal() * c.G - c.G.transpose() * w.asDiagonal() * c.NU;
  const Eigen::Index m = rep.S.rows();
  Eigen::VectorXd nrm(m);
  for (Eigen::Index k = 0; k < m; k++)
  {
    nrm[k] = std::sqrt((mats.h_weights.cwiseProduct(c.G.col(k).cwiseAbs2() + c.NU.col(k).cwiseAbs2())).sum());
  }
  for (Eigen::Index j = 0; j < m; j++)
  {
    for (Eigen::Index k = 0; k < m; k++)
    {
      const double scale = std::max(nrm[j] * nrm[k], 1e-300);
      rep.antisymmetry_defect = std::max(rep.antisymmetry_defect, std::abs(rep.S(j, k) + rep.S(k, j)) / scale);
      const cplx sum = c.lambda[j] + c.lambda[k];
      const double width = cluster_tol * (1.0 + std::abs(c.lambda[j]) + std::abs(c.lambda[k]));
      if (std::abs(sum) <= width)
        continue;
      const double value = std::abs(rep.S(j, k)) / scale;
      rep.max_offpair = std::max(rep.max_offpair, value);
      if (value >= tol)
      {
        rep.violations.push_back({rep.mode_indices[static_cast<std::size_t>(j)],
                                  rep.mode_indices[static_cast<std::size_t>(k)], c.lambda[j], c.lambda[k], value});
      }
    }
  }
  return rep;
}

FormsReport forms_report(const OperatorMatrices &mats, const SpectrumResult &spec, const FormsOptions &opts)
{
  FormsReport rep;
  const PontryaginReport pi = pontryagin_index(mats, opts.tol_zero);
  rep.pontryagin_index = pi.index;
  rep.pontryagin_indeterminate = pi.indeterminate;

  const PairingReport pairing = sigma_pairing_matrix(mats, spec, opts.tol_pairing, opts.cluster_tol);
  rep.sigma_antisymmetry_defect = pairing.antisymmetry_defect;
  rep.pairing_max_offpair = pairing.max_offpair;
  rep.pairing_violations = pairing.violations;
  rep.modes_used = static_cast<int>(pairing.mode_indices.size());

  // Q(u_j, u_k) against (i/2) sigma(conj u_j, lambda_k u_k) for all pairs at once.
  const DataColumns c = data_columns(mats, spec, pairing.mode_indices);
  const Eigen::VectorXcd w = mats.h_weights.cast<cplx>();
  const Eigen::MatrixXcd Q = c.DT.adjoint() * mats.q2.cast<cplx>().asDiagonal() * c.DT +
                             c.G.adjoint() * (mats.q1.cast<cplx>() * c.G);
  const Eigen::MatrixXcd R =
      0.5 * kI * (c.NU.adjoint() * w.asDiagonal() * c.G - c.G.adjoint() * w.asDiagonal() * c.NU) *
      c.lambda.asDiagonal();
  for (Eigen::Index j = 0; j < Q.rows(); j++)
  {
    for (Eigen::Index k = 0; k < Q.cols(); k++)
    {
      rep.lemma12_max_defect = std::max(rep.lemma12_max_defect, std::abs(Q(j, k) - R(j, k)) / (1.0 + std::abs(Q(j, k))));
    }
  }

  // Q on evolved data stays put for pairs with equal eigenvalues.
  for (std::size_t j = 0; j < pairing.mode_indices.size(); j++)
  {
    const CauchyData u = cauchy_data(mats, spec.modes[static_cast<std::size_t>(pairing.mode_indices[j])]);
    const cplx q0 = Q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    for (double t : opts.evolve_times)
    {
      const CauchyData ut = evolve(u, t);
      rep.time_invariance_defect =
          std::max(rep.time_invariance_defect, std::abs(energy_form_Q(mats, ut, ut) - q0) / (1.0 + std::abs(q0)));
    }
  }
  return rep;
}

}  // namespace kgspec
