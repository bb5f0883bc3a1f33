// SPDX-License-Identifier: Apache-2.0

#include "kgspec/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include "kgspec/errors.hpp"
#include "kgspec/lapack.hpp"

namespace kgspec
{

namespace
{

const cplx kI(0.0, 1.0);

double weighted_norm(const Eigen::VectorXcd &v, const Eigen::VectorXd &w)
{
  double acc = 0.0;
  for (Eigen::Index k = 0; k < v.size(); k++)
  {
    acc += w[k] * std::norm(v[k]);
  }
  return std::sqrt(acc);
}

// Unit weighted norm, largest entry real and positive.
void normalize_mode(Eigen::VectorXcd &v, const Eigen::VectorXd &w)
{
  const double nrm = weighted_norm(v, w);
  if (nrm > 0.0)
  {
    v /= nrm;
  }
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index k = 0; k < v.size(); k++)
  {
    const double a = std::abs(v[k]);
    if (a > best * (1.0 + 1e-12))
    {
      best = a;
      imax = k;
    }
  }
  if (best > 0.0)
  {
    v *= std::conj(v[imax]) / best;
  }
}

bool mode_less(const EigenMode &a, const EigenMode &b)
{
  if (a.lambda.real() != b.lambda.real())
    return a.lambda.real() < b.lambda.real();
  if (a.lambda.imag() != b.lambda.imag())
    return a.lambda.imag() < b.lambda.imag();
  return a.residual < b.residual;
}

// Nearest neighbour of target among values sorted by real part.
double nearest_distance(const std::vector<cplx> &sorted, cplx target)
{
  if (sorted.empty())
  {
    return std::numeric_limits<double>::infinity();
  }
  auto it = std::lower_bound(sorted.begin(), sorted.end(), target.real(),
                             [](const cplx &v, double x) { return v.real() < x; });
  double best = std::numeric_limits<double>::infinity();
  for (auto up = it; up != sorted.end(); ++up)
  {
    if (up->real() - target.real() > best)
      break;
    best = std::min(best, std::abs(*up - target));
  }
  for (auto dn = it; dn != sorted.begin();)
  {
    --dn;
    if (target.real() - dn->real() > best)
      break;
    best = std::min(best, std::abs(*dn - target));
  }
  return best;
}

int count_within(const std::vector<cplx> &sorted, cplx target, double tol)
{
  auto it = std::lower_bound(sorted.begin(), sorted.end(), target.real() - tol,
                             [](const cplx &v, double x) { return v.real() < x; });
  int count = 0;
  for (; it != sorted.end() && it->real() <= target.real() + tol; ++it)
  {
    if (std::abs(*it - target) <= tol)
      count++;
  }
  return count;
}

double cluster_width(const SolverOptions &opts, cplx lambda)
{
  return opts.cluster_tol * (1.0 + std::abs(lambda));
}

}  // namespace

std::string route_name(Route r)
{
  switch (r)
  {
    case Route::Companion:
      return "companion";
    case Route::Symmetric:
      return "symmetric";
    case Route::Fourier:
      return "fourier";
    default:
      return "auto";
  }
}

std::vector<cplx> SpectrumResult::trusted_values() const
{
  std::vector<cplx> out;
  for (const auto &m : modes)
  {
    if (m.trusted)
      out.push_back(m.lambda);
  }
  return out;
}

Eigen::MatrixXcd companion_linearize(const Eigen::MatrixXd &P, const Eigen::MatrixXd &X)
{
  if (P.rows() != P.cols() || (X.size() != 0 && (X.rows() != P.rows() || X.cols() != P.cols())))
  {
    throw NumericalError("companion_linearize: size mismatch");
  }
  const Eigen::Index n = P.rows();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n) = P.cast<cplx>();
  if (X.size() != 0)
  {
    A.bottomRightCorner(n, n) = -2.0 * kI * X.cast<cplx>();
  }
  return A;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> selfadjoint_linearize(const Eigen::MatrixXd &P,
                                                                    const Eigen::MatrixXd &X,
                                                                    const Eigen::VectorXd &weights)
{
  if (P.rows() != P.cols() || (X.size() != 0 && (X.rows() != P.rows() || X.cols() != P.cols())) ||
      weights.size() != P.rows())
  {
    throw NumericalError("selfadjoint_linearize: size mismatch");
  }
  const Eigen::Index n = P.rows();
  Eigen::MatrixXcd WP = (weights.asDiagonal() * P).cast<cplx>();
  Eigen::MatrixXcd WX = Eigen::MatrixXcd::Zero(n, n);
  if (X.size() != 0)
  {
    WX = 2.0 * kI * (weights.asDiagonal() * X).cast<cplx>();
  }
  Eigen::MatrixXcd A(2 * n, 2 * n), B = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  Eigen::MatrixXcd off = WP;
  off.diagonal() -= weights.cast<cplx>();
  A.topLeftCorner(n, n) = WX;
  A.bottomRightCorner(n, n) = WX;
  A.topRightCorner(n, n) = off;
  A.bottomLeftCorner(n, n) = off;
  B.topLeftCorner(n, n) = WP;
  B.bottomRightCorner(n, n).diagonal() = weights.cast<cplx>();
  return {A, B};
}

std::pair<cplx, cplx> mu_to_lambda(cplx mu)
{
  cplx s = std::sqrt(mu * mu + 4.0);
  if ((std::conj(mu) * s).real() < 0.0)
  {
    s = -s;
  }
  const cplx q = -(mu + s) / 2.0;  // the larger root in modulus
  const cplx r = -1.0 / q;
  return q.real() >= r.real() ? std::make_pair(q, r) : std::make_pair(r, q);
}

double pencil_residual(const Eigen::MatrixXd &P, const Eigen::MatrixXd &X, const Eigen::VectorXd &weights,
                       cplx lambda, const Eigen::VectorXcd &psi)
{
  Eigen::VectorXcd r = P.cast<cplx>() * psi - lambda * lambda * psi;
  if (X.size() != 0)
  {
    r -= 2.0 * kI * lambda * (X.cast<cplx>() * psi);
  }
  const double nrm = weighted_norm(psi, weights);
  return nrm > 0.0 ? weighted_norm(r, weights) / nrm : std::numeric_limits<double>::infinity();
}

std::vector<EigenMode> residual_filter(const Eigen::MatrixXd &P, const Eigen::MatrixXd &X,
                                       const Eigen::VectorXd &weights, std::vector<EigenMode> modes,
                                       double tol_resid)
{
  std::vector<EigenMode> out;
  for (auto &m : modes)
  {
    m.residual = pencil_residual(P, X, weights, m.lambda, m.psi);
    if (m.residual < tol_resid)
    {
      out.push_back(std::move(m));
    }
  }
  return out;
}

namespace
{

Eigen::MatrixXd symmetrized_P(const OperatorMatrices &mats)
{
  const Eigen::VectorXd sw = mats.weights.cwiseSqrt();
  Eigen::MatrixXd S = mats.stiffness;
  for (Eigen::Index a = 0; a < S.rows(); a++)
  {
    S.row(a) /= sw[a];
  }
  for (Eigen::Index b = 0; b < S.cols(); b++)
  {
    S.col(b) /= sw[b];
  }
  for (Eigen::Index a = 0; a < S.rows(); a++)
  {
    S(a, a) += mats.geom.W[static_cast<std::size_t>(a)];
  }
  return S;
}

void kernel_report(const Eigen::VectorXd &mu, double tol_zero, JordanReport &rep)
{
  rep.geometric = 0;
  rep.ill_conditioned = false;
  for (Eigen::Index k = 0; k < mu.size(); k++)
  {
    const double a = std::abs(mu[k]);
    if (a < tol_zero)
      rep.geometric++;
    if (a > tol_zero / 100.0 && a < tol_zero * 100.0)
      rep.ill_conditioned = true;
  }
}

void mark_trust(std::vector<EigenMode> &modes, const TensorDiff &diff, double cutoff, double tol_tail,
                bool keep_vectors)
{
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < modes.size(); k++)
  {
    modes[k].tail_fraction = -1.0;
    modes[k].trusted = false;
    if (std::abs(modes[k].lambda) < cutoff)
      idx.push_back(k);
  }
  const std::size_t batch = 256;
  for (std::size_t start = 0; start < idx.size(); start += batch)
  {
    const std::size_t cnt = std::min(batch, idx.size() - start);
    Eigen::MatrixXcd V(modes[idx[start]].psi.size(), static_cast<Eigen::Index>(cnt));
    for (std::size_t c = 0; c < cnt; c++)
    {
      V.col(static_cast<Eigen::Index>(c)) = modes[idx[start + c]].psi;
    }
    const Eigen::VectorXd tails = diff.tail_fractions(V);
    for (std::size_t c = 0; c < cnt; c++)
    {
      EigenMode &m = modes[idx[start + c]];
      m.tail_fraction = tails[static_cast<Eigen::Index>(c)];
      m.trusted = m.tail_fraction < tol_tail;
    }
  }
  if (!keep_vectors)
  {
    for (auto &m : modes)
      m.psi.resize(0);
  }
  else
  {
    for (auto &m : modes)
    {
      if (!m.trusted)
        m.psi.resize(0);
    }
  }
}

std::vector<EigenMode> symmetric_route(const OperatorMatrices &mats, JordanReport &jordan,
                                       const SolverOptions &opts)
{
  const Eigen::MatrixXd S = symmetrized_P(mats);
  const SymmetricDecomposition eig = eig_symmetric(S, true);
  const Eigen::VectorXd sw = mats.weights.cwiseSqrt();
  const Eigen::Index n = S.rows();
  // Residuals of P psi = mu psi, shared by both square roots.
  Eigen::MatrixXd R = S * eig.vectors - eig.vectors * eig.values.asDiagonal();
  std::vector<EigenMode> modes;
  kernel_report(eig.values, opts.tol_zero, jordan);
  jordan.algebraic = 0;
  for (Eigen::Index k = 0; k < n; k++)
  {
    const double mu = eig.values[k];
    const double res = R.col(k).norm();  // weighted norm of psi residual = plain norm here
    if (!(res < opts.tol_resid))
      continue;
    Eigen::VectorXcd psi = (eig.vectors.col(k).array() / sw.array()).matrix().cast<cplx>();
    normalize_mode(psi, mats.weights);
    // lambda = 0 is accepted whenever its own residual |mu| passes the filter.
    const cplx root = std::abs(mu) < opts.tol_resid ? cplx(0.0, 0.0)
                      : mu >= 0.0                  ? cplx(std::sqrt(mu), 0.0)
                                                   : cplx(0.0, std::sqrt(-mu));
    for (int sgn : {1, -1})
    {
      EigenMode m;
      m.lambda = static_cast<double>(sgn) * root;
      m.residual = root == 0.0 ? std::max(res, std::abs(mu)) : res;
      m.psi = sgn == 1 ? psi : psi.conjugate();
      if (std::abs(m.lambda) < opts.tol_zero)
        jordan.algebraic++;
      modes.push_back(std::move(m));
    }
  }
  return modes;
}

// Rayleigh functional of a unit mode: psi^* W (P - 2 i l X - l^2) psi = 0 reads
// l^2 - 2 s l - p = 0 with p = psi^* W P psi and i s = psi^* W X psi, both real.
// Its root next to the computed eigenvalue is second-order accurate in the
// eigenvector error and exactly real when s^2 + p > 0; it replaces the dense
// solver's value when it does not increase the residual.
void refine_real(const OperatorMatrices &mats, EigenMode &m, const Eigen::VectorXcd &Ppsi, const Eigen::VectorXcd &Xpsi)
{
  const Eigen::VectorXcd wpsi = mats.weights.cast<cplx>().cwiseProduct(m.psi);
  const double p = wpsi.dot(Ppsi).real();
  const double s = Xpsi.size() != 0 ? wpsi.dot(Xpsi).imag() : 0.0;
  const double disc = s * s + p;
  if (disc < 0.0)
    return;
  const double root = std::sqrt(disc);
  const double cand = std::abs(m.lambda - (s + root)) < std::abs(m.lambda - (s - root)) ? s + root : s - root;
  Eigen::VectorXcd r = Ppsi - cand * cand * m.psi;
  if (Xpsi.size() != 0)
  {
    r -= 2.0 * kI * cand * Xpsi;
  }
  const double res = weighted_norm(r, mats.weights);
  if (res <= m.residual)
  {
    m.lambda = cand;
    m.residual = res;
  }
}

std::vector<EigenMode> companion_route(const OperatorMatrices &mats, JordanReport &jordan,
                                       const SolverOptions &opts)
{
  const Eigen::Index n = mats.P.rows();
  const EigenDecomposition eig = eig_general(companion_linearize(mats.P, mats.X), true);
  Eigen::MatrixXcd Psi = eig.vectors.topRows(n);
  for (Eigen::Index k = 0; k < Psi.cols(); k++)
  {
    Eigen::VectorXcd v = Psi.col(k);
    normalize_mode(v, mats.weights);
    Psi.col(k) = v;
  }
  Eigen::MatrixXcd R = mats.P.cast<cplx>() * Psi;
  Eigen::MatrixXcd XPsi;
  if (!mats.x_is_zero())
  {
    XPsi = mats.X.cast<cplx>() * Psi;
  }
  std::vector<EigenMode> modes;
  jordan.algebraic = 0;
  for (Eigen::Index k = 0; k < Psi.cols(); k++)
  {
    const cplx lam = eig.values[k];
    Eigen::VectorXcd r = R.col(k) - lam * lam * Psi.col(k);
    if (XPsi.size() != 0)
    {
      r -= 2.0 * kI * lam * XPsi.col(k);
    }
    const double res = weighted_norm(r, mats.weights);
    if (std::abs(lam) < opts.tol_zero)
      jordan.algebraic++;
    if (!(res < opts.tol_resid))
      continue;
    EigenMode m;
    m.lambda = lam;
    m.residual = res;
    m.psi = Psi.col(k);
    refine_real(mats, m, R.col(k), XPsi.size() != 0 ? XPsi.col(k) : Eigen::VectorXcd());
    modes.push_back(std::move(m));
  }
  const SymmetricDecomposition s = eig_symmetric(symmetrized_P(mats), false);
  kernel_report(s.values, opts.tol_zero, jordan);
  return modes;
}

void run_cross_check(const OperatorMatrices &mats, SpectrumResult &res, const SolverOptions &opts)
{
  const Eigen::Index n = mats.P.rows();
  auto [A, B] = selfadjoint_linearize(mats.P, mats.X, mats.weights);
  const EigenDecomposition eig = eig_generalized(A, B, true);
  std::vector<cplx> found;
  for (Eigen::Index k = 0; k < eig.values.size(); k++)
  {
    const cplx mu = eig.values[k];
    if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag()))
      continue;
    const Eigen::VectorXcd psi = eig.vectors.col(k).tail(n);
    const auto [l1, l2] = mu_to_lambda(mu);
    for (cplx lam : {l1, l2})
    {
      if (pencil_residual(mats.P, mats.X, mats.weights, lam, psi) < opts.tol_resid)
        found.push_back(lam);
    }
  }
  std::sort(found.begin(), found.end(), [](const cplx &a, const cplx &b) { return a.real() < b.real(); });
  double worst = 0.0;
  int compared = 0;
  for (const auto &m : res.modes)
  {
    if (!m.trusted || std::abs(m.lambda) <= 0.1)
      continue;
    worst = std::max(worst, nearest_distance(found, m.lambda));
    compared++;
  }
  res.cross_check_discrepancy = worst;
  res.cross_check_compared = compared;
}

}  // namespace

JordanReport detect_jordan_zero(const OperatorMatrices &mats, const SolverOptions &opts)
{
  JordanReport rep;
  const SymmetricDecomposition s = eig_symmetric(symmetrized_P(mats), false);
  kernel_report(s.values, opts.tol_zero, rep);
  if (mats.x_is_zero())
  {
    for (Eigen::Index k = 0; k < s.values.size(); k++)
    {
      if (std::abs(s.values[k]) < opts.tol_resid)
        rep.algebraic += 2;
    }
  }
  else
  {
    const EigenDecomposition eig = eig_general(companion_linearize(mats.P, mats.X), false);
    for (Eigen::Index k = 0; k < eig.values.size(); k++)
    {
      if (std::abs(eig.values[k]) < opts.tol_zero)
        rep.algebraic++;
    }
  }
  return rep;
}

void finalize_spectrum(SpectrumResult &res, const SolverOptions &opts)
{
  // Symmetry report on the raw values, before any snapping.
  std::vector<cplx> pool;
  for (const auto &m : res.modes)
    pool.push_back(m.lambda);
  std::sort(pool.begin(), pool.end(), [](const cplx &a, const cplx &b) { return a.real() < b.real(); });
  SymmetryReport sym;
  for (const auto &m : res.modes)
  {
    // The zero cluster is a split Jordan block; it is accounted for by the Jordan report.
    if (!m.trusted || std::abs(m.lambda) < opts.tol_zero)
      continue;
    sym.reflection_defect = std::max(sym.reflection_defect, nearest_distance(pool, -m.lambda));
    sym.conjugation_defect = std::max(sym.conjugation_defect, nearest_distance(pool, std::conj(m.lambda)));
  }

  for (auto &m : res.modes)
  {
    if (std::abs(m.lambda) < opts.tol_zero)
      m.lambda = 0.0;
    else if (std::abs(m.lambda.imag()) < opts.tol_real)
      m.lambda = m.lambda.real();
  }
  std::stable_sort(res.modes.begin(), res.modes.end(), mode_less);

  res.groups.clear();
  res.complex_modes.clear();
  for (std::size_t k = 0; k < res.modes.size();)
  {
    if (!res.modes[k].trusted)
    {
      k++;
      continue;
    }
    const cplx first = res.modes[k].lambda;
    cplx sum = 0.0;
    int count = 0;
    std::size_t j = k;
    for (; j < res.modes.size(); j++)
    {
      if (!res.modes[j].trusted)
        continue;
      if (std::abs(res.modes[j].lambda - first) > cluster_width(opts, first))
        break;
      sum += res.modes[j].lambda;
      count++;
    }
    res.groups.push_back({sum / static_cast<double>(count), count});
    k = j;
  }

  // Multiplicity of the reflected partner, counted in the full (filtered) pool.
  std::vector<cplx> snapped;
  for (const auto &m : res.modes)
    snapped.push_back(m.lambda);
  std::sort(snapped.begin(), snapped.end(), [](const cplx &a, const cplx &b) { return a.real() < b.real(); });
  for (const auto &g : res.groups)
  {
    const double tol = cluster_width(opts, g.lambda);
    if (count_within(snapped, -g.lambda, tol) != count_within(snapped, g.lambda, tol))
      sym.multiplicity_mismatches++;
  }
  for (std::size_t k = 0; k < res.modes.size(); k++)
  {
    const EigenMode &m = res.modes[k];
    if (!m.trusted || std::abs(m.lambda.imag()) <= opts.tol_real)
      continue;
    res.complex_modes.push_back(k);
    const double tol = cluster_width(opts, m.lambda);
    for (cplx image : {std::conj(m.lambda), -m.lambda, -std::conj(m.lambda)})
    {
      if (count_within(snapped, image, tol) == 0)
        sym.quadruples_ok = false;
    }
  }
  res.symmetry = sym;
}

SpectrumResult solve_spectrum(const OperatorMatrices &mats, const SolverOptions &opts)
{
  Route route = opts.route;
  if (route == Route::Auto)
  {
    route = mats.x_is_zero() ? Route::Symmetric : Route::Companion;
  }
  if (route == Route::Fourier)
  {
    throw NumericalError("the Fourier route works on the model, not on assembled matrices");
  }
  if (route == Route::Symmetric && !mats.x_is_zero())
  {
    throw NumericalError("symmetric route requires X = 0");
  }
  SpectrumResult res;
  res.route = route_name(route);
  res.lambda_cutoff = mats.lambda_cutoff;
  res.candidates = static_cast<std::size_t>(2 * mats.P.rows());
  res.modes = route == Route::Symmetric ? symmetric_route(mats, res.jordan_at_zero, opts)
                                        : companion_route(mats, res.jordan_at_zero, opts);
  const TensorDiff diff(mats.grid);
  mark_trust(res.modes, diff, mats.lambda_cutoff, opts.tol_tail, opts.keep_vectors);
  finalize_spectrum(res, opts);
  if (opts.cross_check && 2 * mats.P.rows() <= opts.cross_check_max_size)
  {
    run_cross_check(mats, res, opts);
  }
  return res;
}

SpectrumResult solve_spectrum_fourier(const StationaryModel &model, const SpectralGrid &grid,
                                      const SolverOptions &opts)
{
  if (!model.constant_coefficients())
  {
    throw NumericalError("Fourier route requires constant coefficients");
  }
  const int d = model.d();
  std::vector<double> origin(d, 0.0);
  const PointGeometry g = model.geometry_at(origin.data());
  const double W = g.N * g.N * g.V;
  SpectrumResult res;
  res.route = route_name(Route::Fourier);
  res.lambda_cutoff = lambda_cutoff(model, grid, opts.cutoff_fraction);
  res.candidates = 2 * grid.size();
  int m[kMaxDim];
  for (std::size_t p = 0; p < grid.size(); p++)
  {
    grid.index(p, m);
    double k[kMaxDim];
    bool nyq[kMaxDim];
    bool high = false;
    for (int i = 0; i < d; i++)
    {
      const int M = grid.points(i);
      const int f = m[i] <= M / 2 ? m[i] : m[i] - M;
      nyq[i] = (m[i] == M / 2);
      k[i] = nyq[i] ? 0.0 : 2.0 * std::numbers::pi * f / grid.length(i);
      if (3 * std::abs(f) > M)
        high = true;
    }
    double pk = W, b = 0.0;
    for (int i = 0; i < d; i++)
    {
      b += g.beta[i] * k[i];
      if (nyq[i])
      {
        const double kappa = std::numbers::pi * grid.points(i) / grid.length(i);
        pk += kappa * kappa * g.htinv[i * d + i];
      }
      for (int j = 0; j < d; j++)
      {
        pk += g.htinv[i * d + j] * k[i] * k[j];
      }
    }
    if (std::abs(pk) < opts.tol_zero)
      res.jordan_at_zero.geometric++;
    const cplx disc = std::sqrt(cplx(b * b + pk, 0.0));
    for (int sgn : {1, -1})
    {
      EigenMode mode;
      mode.lambda = b + static_cast<double>(sgn) * disc;
      mode.residual = std::abs(pk + 2.0 * mode.lambda * b - mode.lambda * mode.lambda);
      mode.tail_fraction = high ? 1.0 : 0.0;
      mode.trusted = !high && std::abs(mode.lambda) < res.lambda_cutoff;
      if (std::abs(mode.lambda) < opts.tol_zero)
        res.jordan_at_zero.algebraic++;
      if (mode.residual < opts.tol_resid * (1.0 + std::abs(pk)))
        res.modes.push_back(std::move(mode));
    }
  }
  finalize_spectrum(res, opts);
  return res;
}

double max_matched_distance(std::vector<double> a, std::vector<double> b)
{
  if (a.size() != b.size())
  {
    return std::numeric_limits<double>::infinity();
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); k++)
  {
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

}  // namespace kgspec
