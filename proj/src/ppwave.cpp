// SPDX-License-Identifier: Apache-2.0

#include "kgspec/ppwave.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <boost/math/tools/toms748_solve.hpp>
#include "kgspec/errors.hpp"
#include "kgspec/lapack.hpp"

namespace kgspec
{

namespace
{

Eigen::VectorXd sample_profile(const PPWaveParams &pp, const SpectralGrid &base)
{
  Eigen::VectorXd H(static_cast<Eigen::Index>(base.size()));
  double y[kMaxDim];
  for (std::size_t k = 0; k < base.size(); k++)
  {
    base.node(k, y);
    H[static_cast<Eigen::Index>(k)] = pp.H(y);
  }
  return H;
}

// -Delta_y on the flat base torus, with the Nyquist penalty.
Eigen::MatrixXd base_laplacian(const SpectralGrid &base)
{
  const int d = base.dim();
  std::vector<double> coef(base.size() * d * d, 0.0);
  for (std::size_t p = 0; p < base.size(); p++)
  {
    for (int i = 0; i < d; i++)
    {
      coef[p * d * d + i * d + i] = 1.0;
    }
  }
  const TensorDiff diff(base);
  return diff.stiffness(coef, nyquist_penalty(base, coef));
}

}  // namespace

const PPWaveParams &ppwave_params(const StationaryModel &model)
{
  if (!model.ppwave)
  {
    throw ConfigError("/family", "model is not a ppwave model");
  }
  return *model.ppwave;
}

ReducedPencil ppwave_reduced_pencil(const StationaryModel &model, const SpectralGrid &base, int m)
{
  const PPWaveParams &pp = ppwave_params(model);
  const Eigen::VectorXd H = sample_profile(pp, base);
  const double a = 2.0 * std::numbers::pi * m / pp.L;
  const double al2 = pp.alpha * pp.alpha;
  ReducedPencil k;
  k.K0 = base_laplacian(base);
  k.K0.diagonal() += (a * a / al2) * H;
  k.K1 = (2.0 * a / al2) * (H.array() - pp.alpha).matrix();
  k.K2 = ((H.array() - 2.0 * pp.alpha) / al2).matrix();
  return k;
}

double ppwave_cutoff(const StationaryModel &model, const SpectralGrid &base, double fraction)
{
  const Eigen::VectorXd H = sample_profile(ppwave_params(model), base);
  double kmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < base.dim(); i++)
  {
    kmin = std::min(kmin, std::numbers::pi * base.points(i) / base.length(i));
  }
  return fraction * kmin * std::sqrt(H.minCoeff());
}

int ppwave_max_branch(const StationaryModel &model, const SpectralGrid &base, double lambda_max)
{
  const PPWaveParams &pp = ppwave_params(model);
  const double hmin = sample_profile(pp, base).minCoeff();
  // A bound state needs V < 0 somewhere, which forces |a| <= |lambda| max(1, 2 alpha / Hmin - 1).
  const double amax = lambda_max * std::max(1.0, 2.0 * pp.alpha / hmin - 1.0);
  return static_cast<int>(std::ceil(amax * pp.L / (2.0 * std::numbers::pi))) + 1;
}

std::vector<EigenMode> ppwave_branch_modes(const StationaryModel &model, const SpectralGrid &base, int m,
                                           const SolverOptions &opts)
{
  const ReducedPencil k = ppwave_reduced_pencil(model, base, m);
  const Eigen::Index n = k.K0.rows();
  std::vector<EigenMode> out;
  auto keep = [&](cplx lam, Eigen::VectorXcd phi)
  {
    const double nrm = phi.norm();
    if (nrm == 0.0)
      return;
    phi /= nrm;
    const Eigen::VectorXcd r = k.K0.cast<cplx>() * phi + lam * k.K1.cast<cplx>().cwiseProduct(phi) +
                               lam * lam * k.K2.cast<cplx>().cwiseProduct(phi);
    EigenMode mode;
    mode.lambda = lam;
    mode.residual = r.norm();
    mode.psi = std::move(phi);
    if (mode.residual < opts.tol_resid)
      out.push_back(std::move(mode));
  };
  if (m == 0)
  {
    // K1 = 0: K0 phi = lambda^2 (-K2) phi is a definite symmetric problem, which
    // keeps the Jordan pair at zero from splitting by sqrt(eps ||K0||).
    const Eigen::VectorXd s = (-k.K2).cwiseSqrt().cwiseInverse();
    const SymmetricDecomposition eig = eig_symmetric(s.asDiagonal() * k.K0 * s.asDiagonal(), true);
    for (Eigen::Index c = 0; c < n; c++)
    {
      const double mu = eig.values[c];
      // lambda = 0 is accepted whenever its own residual |mu| passes the filter.
      const cplx root = std::abs(mu) < opts.tol_resid ? cplx(0.0, 0.0)
                        : mu >= 0.0                  ? cplx(std::sqrt(mu), 0.0)
                                                     : cplx(0.0, std::sqrt(-mu));
      const Eigen::VectorXcd phi = (s.asDiagonal() * eig.vectors.col(c)).cast<cplx>();
      keep(root, phi);
      keep(-root, phi);
    }
    return out;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  const Eigen::VectorXd inv2 = k.K2.cwiseInverse();
  A.bottomLeftCorner(n, n) = -(inv2.asDiagonal() * k.K0);
  A.bottomRightCorner(n, n).diagonal() = -inv2.cwiseProduct(k.K1);
  const EigenDecomposition eig = eig_general_real(A, true);
  for (Eigen::Index c = 0; c < eig.values.size(); c++)
  {
    keep(eig.values[c], eig.vectors.col(c).head(n));
  }
  return out;
}

SpectrumResult ppwave_spectrum(const StationaryModel &model, const SpectralGrid &base, const SolverOptions &opts)
{
  SpectrumResult res;
  res.route = "ppwave_reduced";
  res.lambda_cutoff = ppwave_cutoff(model, base, opts.cutoff_fraction);
  const int mmax = ppwave_max_branch(model, base, res.lambda_cutoff);
  const TensorDiff diff(base);
  for (int m = -mmax; m <= mmax; m++)
  {
    std::vector<EigenMode> modes = ppwave_branch_modes(model, base, m, opts);
    res.candidates += 2 * base.size();
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < modes.size(); k++)
    {
      modes[k].tail_fraction = -1.0;
      modes[k].trusted = false;
      if (std::abs(modes[k].lambda) < opts.tol_zero)
        res.jordan_at_zero.algebraic++;
      if (std::abs(modes[k].lambda) < res.lambda_cutoff)
        idx.push_back(k);
    }
    if (!idx.empty())
    {
      Eigen::MatrixXcd V(static_cast<Eigen::Index>(base.size()), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); c++)
        V.col(static_cast<Eigen::Index>(c)) = modes[idx[c]].psi;
      const Eigen::VectorXd tails = diff.tail_fractions(V);
      for (std::size_t c = 0; c < idx.size(); c++)
      {
        modes[idx[c]].tail_fraction = tails[static_cast<Eigen::Index>(c)];
        modes[idx[c]].trusted = tails[static_cast<Eigen::Index>(c)] < opts.tol_tail;
      }
    }
    for (auto &mode : modes)
    {
      if (!opts.keep_vectors || !mode.trusted)
        mode.psi.resize(0);
      res.modes.push_back(std::move(mode));
    }
  }
  // Kernel of the m = 0 pencil at lambda = 0: constants in y.
  {
    const ReducedPencil k0 = ppwave_reduced_pencil(model, base, 0);
    const SymmetricDecomposition s = eig_symmetric(k0.K0, false);
    for (Eigen::Index k = 0; k < s.values.size(); k++)
    {
      if (std::abs(s.values[k]) < opts.tol_zero)
        res.jordan_at_zero.geometric++;
    }
  }
  finalize_spectrum(res, opts);
  return res;
}

double ppwave_branch_function(const StationaryModel &model, const SpectralGrid &base, int m, double lambda)
{
  const ReducedPencil k = ppwave_reduced_pencil(model, base, m);
  Eigen::MatrixXd K = k.K0;
  K.diagonal() += lambda * k.K1 + lambda * lambda * k.K2;
  const SymmetricDecomposition s = eig_symmetric(K, false);
  double best = s.values[0];
  for (Eigen::Index i = 1; i < s.values.size(); i++)
  {
    if (std::abs(s.values[i]) < std::abs(best))
      best = s.values[i];
  }
  return best;
}

BranchScanReport ppwave_branch_solve(const StationaryModel &model, const SpectralGrid &base, int m, double lo,
                                     double hi, int scan_points)
{
  BranchScanReport rep;
  if (!(hi > lo) || scan_points < 2)
  {
    return rep;
  }
  const ReducedPencil k = ppwave_reduced_pencil(model, base, m);
  auto F = [&](double lambda)
  {
    Eigen::MatrixXd K = k.K0;
    K.diagonal() += lambda * k.K1 + lambda * lambda * k.K2;
    const SymmetricDecomposition s = eig_symmetric(K, false);
    double best = s.values[0];
    for (Eigen::Index i = 1; i < s.values.size(); i++)
    {
      if (std::abs(s.values[i]) < std::abs(best))
        best = s.values[i];
    }
    return best;
  };
  std::vector<double> grid(static_cast<std::size_t>(scan_points));
  std::vector<double> val(grid.size());
  for (int i = 0; i < scan_points; i++)
  {
    grid[i] = lo + (hi - lo) * i / (scan_points - 1);
    val[i] = F(grid[i]);
  }
  for (int i = 0; i + 1 < scan_points; i++)
  {
    double a = grid[i], b = grid[i + 1];
    const double fa = val[i], fb = val[i + 1];
    if (fa == 0.0)
    {
      rep.roots.push_back(a);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0))
      continue;
    rep.sign_changes++;
    boost::uintmax_t iters = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto [r0, r1] = boost::math::tools::toms748_solve(F, a, b, fa, fb, tol, iters);
    const double root = 0.5 * (r0 + r1);
    // A jump between eigenvalues of opposite sign also flips the sign.
    const double scale = 1.0 + std::abs(fa) + std::abs(fb);
    if (std::abs(F(root)) < 1e-8 * scale)
      rep.roots.push_back(root);
    else
      rep.rejected++;
  }
  return rep;
}

std::vector<double> ppwave_constant_family(const StationaryModel &model, int mmax)
{
  const PPWaveParams &pp = ppwave_params(model);
  std::vector<double> out;
  for (int m = -mmax; m <= mmax; m++)
  {
    out.push_back(2.0 * std::numbers::pi * m / pp.L);
  }
  return out;
}

}  // namespace kgspec
