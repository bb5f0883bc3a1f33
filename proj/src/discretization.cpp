// SPDX-License-Identifier: Apache-2.0

#include "kgspec/discretization.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include "kgspec/errors.hpp"

namespace kgspec
{

Eigen::MatrixXd fourier_diff_matrix(int M, double L)
{
  if (M < 8 || M % 2 != 0)
  {
    throw ConfigError("fourier_diff_matrix: M must be even and >= 8, got " + std::to_string(M));
  }
  if (!(L > 0.0))
  {
    throw ConfigError("fourier_diff_matrix: L must be positive");
  }
  const double h = 2.0 * std::numbers::pi / M;
  const double scale = 2.0 * std::numbers::pi / L;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; j++)
  {
    for (int k = 0; k < M; k++)
    {
      if (j != k)
      {
        const int diff = j - k;
        const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
        D(j, k) = scale * 0.5 * sign / std::tan(diff * h / 2.0);
      }
    }
  }
  return D;
}

TensorDiff::TensorDiff(const SpectralGrid &grid) : grid_(grid)
{
  for (int i = 0; i < grid.dim(); i++)
  {
    D_.push_back(fourier_diff_matrix(grid.points(i), grid.length(i)));
  }
}

namespace
{

template <class Vec>
Vec apply_axis(const SpectralGrid &grid, int axis, const Eigen::MatrixXd &A, const Vec &u,
               bool transpose)
{
  const std::size_t n = grid.size();
  const std::size_t s = grid.stride(axis);
  const int M = grid.points(axis);
  Vec out = Vec::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < n; p++)
  {
    const int ap = static_cast<int>((p / s) % static_cast<std::size_t>(M));
    const std::size_t base = p - static_cast<std::size_t>(ap) * s;
    typename Vec::Scalar acc(0.0);
    for (int k = 0; k < M; k++)
    {
      const double a = transpose ? A(k, ap) : A(ap, k);
      acc += a * u[static_cast<Eigen::Index>(base + static_cast<std::size_t>(k) * s)];
    }
    out[static_cast<Eigen::Index>(p)] = acc;
  }
  return out;
}

// Applies an M x M complex matrix along one axis to every column of V.
Eigen::MatrixXcd transform_axis(const SpectralGrid &grid, int axis, const Eigen::MatrixXcd &F,
                                const Eigen::MatrixXcd &V)
{
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index s = static_cast<Eigen::Index>(grid.stride(axis));
  const Eigen::Index M = grid.points(axis);
  const Eigen::Index outer = n / (M * s);
  Eigen::MatrixXcd out(V.rows(), V.cols());
  for (Eigen::Index c = 0; c < V.cols(); c++)
  {
    for (Eigen::Index o = 0; o < outer; o++)
    {
      const Eigen::Index off = o * M * s;
      // Block viewed column-major as s x M: B(inner, k).
      Eigen::Map<const Eigen::MatrixXcd> B(V.col(c).data() + off, s, M);
      Eigen::Map<Eigen::MatrixXcd> R(out.col(c).data() + off, s, M);
      R.noalias() = B * F.transpose();
    }
  }
  return out;
}

Eigen::MatrixXcd dft_matrix(int M)
{
  Eigen::MatrixXcd F(M, M);
  for (int k = 0; k < M; k++)
  {
    for (int j = 0; j < M; j++)
    {
      const double th = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(k) * j) % M) / M;
      F(k, j) = std::complex<double>(std::cos(th), std::sin(th));
    }
  }
  return F;
}

// Signed frequency of DFT row k.
int signed_freq(int k, int M)
{
  return k <= M / 2 ? k : k - M;
}

}  // namespace

Eigen::VectorXd TensorDiff::derivative(int axis, const Eigen::VectorXd &u) const
{
  return apply_axis(grid_, axis, D_[axis], u, false);
}

Eigen::VectorXcd TensorDiff::derivative(int axis, const Eigen::VectorXcd &u) const
{
  return apply_axis(grid_, axis, D_[axis], u, false);
}

Eigen::MatrixXd TensorDiff::stiffness(const std::vector<double> &coef,
                                      const std::vector<double> &penalty) const
{
  const int d = grid_.dim();
  const std::size_t n = grid_.size();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  int a[kMaxDim];
  for (std::size_t p = 0; p < n; p++)
  {
    grid_.index(p, a);
    for (int i = 0; i < d; i++)
    {
      const Eigen::MatrixXd &Di = D_[i];
      const std::size_t si = grid_.stride(i);
      const int Mi = grid_.points(i);
      const std::size_t pbase = p - static_cast<std::size_t>(a[i]) * si;
      // Same-axis block: sum over c_i of D[c_i, a_i] C_c D[c_i, b_i].
      for (int bi = 0; bi < Mi; bi++)
      {
        const std::size_t q = pbase + static_cast<std::size_t>(bi) * si;
        double acc = 0.0;
        for (int ci = 0; ci < Mi; ci++)
        {
          const std::size_t c = pbase + static_cast<std::size_t>(ci) * si;
          acc += Di(ci, a[i]) * coef[c * d * d + i * d + i] * Di(ci, bi);
        }
        if (!penalty.empty() && penalty[i] != 0.0)
        {
          const double sgn = ((a[i] + bi) % 2 == 0) ? 1.0 : -1.0;
          acc += penalty[i] * sgn / Mi;
        }
        S(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) += acc;
      }
      // Mixed blocks: c_i = b_i, c_j = a_j.
      for (int j = 0; j < d; j++)
      {
        if (j == i)
          continue;
        const Eigen::MatrixXd &Dj = D_[j];
        const std::size_t sj = grid_.stride(j);
        const int Mj = grid_.points(j);
        for (int bi = 0; bi < Mi; bi++)
        {
          const std::size_t c = pbase + static_cast<std::size_t>(bi) * si;  // c_j = a_j
          const double left = Di(bi, a[i]) * coef[c * d * d + i * d + j];
          if (left == 0.0)
            continue;
          const std::size_t qbase = c - static_cast<std::size_t>(a[j]) * sj;
          for (int bj = 0; bj < Mj; bj++)
          {
            const std::size_t q = qbase + static_cast<std::size_t>(bj) * sj;
            S(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) += left * Dj(a[j], bj);
          }
        }
      }
    }
  }
  return S;
}

Eigen::VectorXd TensorDiff::apply_stiffness(const std::vector<double> &coef,
                                            const std::vector<double> &penalty,
                                            const Eigen::VectorXd &u) const
{
  const int d = grid_.dim();
  const std::size_t n = grid_.size();
  std::vector<Eigen::VectorXd> du;
  for (int j = 0; j < d; j++)
  {
    du.push_back(derivative(j, u));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (int i = 0; i < d; i++)
  {
    Eigen::VectorXd flux = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < n; p++)
    {
      for (int j = 0; j < d; j++)
      {
        flux[static_cast<Eigen::Index>(p)] += coef[p * d * d + i * d + j] * du[j][static_cast<Eigen::Index>(p)];
      }
    }
    out += apply_axis(grid_, i, D_[i], flux, true);
    if (!penalty.empty() && penalty[i] != 0.0)
    {
      const std::size_t s = grid_.stride(i);
      const int M = grid_.points(i);
      for (std::size_t p = 0; p < n; p++)
      {
        const int ap = static_cast<int>((p / s) % static_cast<std::size_t>(M));
        if (ap != 0)
          continue;
        double proj = 0.0;
        for (int k = 0; k < M; k++)
        {
          proj += ((k % 2 == 0) ? 1.0 : -1.0) * u[static_cast<Eigen::Index>(p + k * s)];
        }
        for (int k = 0; k < M; k++)
        {
          out[static_cast<Eigen::Index>(p + k * s)] += penalty[i] * ((k % 2 == 0) ? 1.0 : -1.0) * proj / M;
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd TensorDiff::skew_first_order(const std::vector<double> &a, const Eigen::VectorXd &w) const
{
  const int d = grid_.dim();
  const std::size_t n = grid_.size();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  int m[kMaxDim];
  for (std::size_t p = 0; p < n; p++)
  {
    grid_.index(p, m);
    for (int i = 0; i < d; i++)
    {
      const std::size_t s = grid_.stride(i);
      const std::size_t base = p - static_cast<std::size_t>(m[i]) * s;
      for (int k = 0; k < grid_.points(i); k++)
      {
        const std::size_t q = base + static_cast<std::size_t>(k) * s;
        X(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) +=
            0.5 * D_[i](m[i], k) * (a[p * d + i] + a[q * d + i]) / w[static_cast<Eigen::Index>(p)];
      }
    }
  }
  return X;
}

Eigen::VectorXd TensorDiff::tail_fractions(const Eigen::MatrixXcd &vectors) const
{
  const int d = grid_.dim();
  Eigen::MatrixXcd C = vectors;
  for (int i = 0; i < d; i++)
  {
    C = transform_axis(grid_, i, dft_matrix(grid_.points(i)), C);
  }
  std::vector<char> high(grid_.size(), 0);
  int m[kMaxDim];
  for (std::size_t p = 0; p < grid_.size(); p++)
  {
    grid_.index(p, m);
    for (int i = 0; i < d; i++)
    {
      const int M = grid_.points(i);
      if (3 * std::abs(signed_freq(m[i], M)) > M)
      {
        high[p] = 1;
      }
    }
  }
  Eigen::VectorXd out(vectors.cols());
  for (Eigen::Index c = 0; c < C.cols(); c++)
  {
    double tot = 0.0, tail = 0.0;
    for (Eigen::Index p = 0; p < C.rows(); p++)
    {
      const double e = std::norm(C(p, c));
      tot += e;
      if (high[static_cast<std::size_t>(p)])
        tail += e;
    }
    out[c] = tot > 0.0 ? tail / tot : 0.0;
  }
  return out;
}

Eigen::VectorXd TensorDiff::two_thirds_filter(const Eigen::VectorXd &u) const
{
  const int d = grid_.dim();
  Eigen::MatrixXcd C = u.cast<std::complex<double>>();
  for (int i = 0; i < d; i++)
  {
    C = transform_axis(grid_, i, dft_matrix(grid_.points(i)), C);
  }
  int m[kMaxDim];
  for (std::size_t p = 0; p < grid_.size(); p++)
  {
    grid_.index(p, m);
    for (int i = 0; i < d; i++)
    {
      const int M = grid_.points(i);
      if (3 * std::abs(signed_freq(m[i], M)) > M)
      {
        C(static_cast<Eigen::Index>(p), 0) = 0.0;
      }
    }
  }
  for (int i = 0; i < d; i++)
  {
    const int M = grid_.points(i);
    C = transform_axis(grid_, i, dft_matrix(M).adjoint() / static_cast<double>(M), C);
  }
  return C.col(0).real();
}

std::vector<double> nyquist_penalty(const SpectralGrid &grid, const std::vector<double> &coef)
{
  const int d = grid.dim();
  std::vector<double> pen(d, 0.0);
  for (int i = 0; i < d; i++)
  {
    double mean = 0.0;
    for (std::size_t p = 0; p < grid.size(); p++)
    {
      mean += coef[p * d * d + i * d + i];
    }
    mean /= static_cast<double>(grid.size());
    const double kappa = std::numbers::pi * grid.points(i) / grid.length(i);
    pen[i] = kappa * kappa * mean;
  }
  return pen;
}

namespace
{

Eigen::VectorXd weights_of(const ReducedGeometry &geom, const SpectralGrid &grid)
{
  Eigen::VectorXd w(static_cast<Eigen::Index>(geom.size));
  for (std::size_t p = 0; p < geom.size; p++)
  {
    w[static_cast<Eigen::Index>(p)] = geom.sqrt_det_ht[p] * grid.cell_volume();
  }
  return w;
}

std::vector<double> stiffness_coef(const ReducedGeometry &geom, const Eigen::VectorXd &w)
{
  const std::size_t dd = static_cast<std::size_t>(geom.d * geom.d);
  std::vector<double> coef(geom.size * dd);
  for (std::size_t p = 0; p < geom.size; p++)
  {
    for (std::size_t k = 0; k < dd; k++)
    {
      coef[p * dd + k] = w[static_cast<Eigen::Index>(p)] * geom.htinv[p * dd + k];
    }
  }
  return coef;
}

}  // namespace

std::vector<double> reduced_potential(const ReducedGeometry &geom, const TensorDiff &diff,
                                      const DiscretizationOptions &opts)
{
  const SpectralGrid &grid = diff.grid();
  const Eigen::VectorXd w = weights_of(geom, grid);
  const std::vector<double> coef = stiffness_coef(geom, w);
  const std::vector<double> pen = opts.nyquist_penalty ? nyquist_penalty(grid, coef) : std::vector<double>{};
  Eigen::VectorXd omega = Eigen::Map<const Eigen::VectorXd>(geom.Omega.data(), static_cast<Eigen::Index>(geom.size));
  const Eigen::VectorXd s = diff.apply_stiffness(coef, pen, omega);
  Eigen::VectorXd W(static_cast<Eigen::Index>(geom.size));
  for (std::size_t p = 0; p < geom.size; p++)
  {
    const auto k = static_cast<Eigen::Index>(p);
    // Delta Omega = -w^{-1} S Omega, so P Omega = 0 exactly when V = 0.
    W[k] = -s[k] / (w[k] * omega[k]) + geom.N[p] * geom.N[p] * geom.V[p];
  }
  if (opts.dealias)
  {
    W = diff.two_thirds_filter(W);
  }
  return std::vector<double>(W.data(), W.data() + W.size());
}

Eigen::MatrixXd assemble_P(const ReducedGeometry &geom, const TensorDiff &diff,
                           const DiscretizationOptions &opts)
{
  const SpectralGrid &grid = diff.grid();
  const Eigen::VectorXd w = weights_of(geom, grid);
  const std::vector<double> coef = stiffness_coef(geom, w);
  const std::vector<double> pen = opts.nyquist_penalty ? nyquist_penalty(grid, coef) : std::vector<double>{};
  Eigen::MatrixXd P = diff.stiffness(coef, pen);
  const std::vector<double> W = reduced_potential(geom, diff, opts);
  for (Eigen::Index p = 0; p < P.rows(); p++)
  {
    P.row(p) /= w[p];
    P(p, p) += W[static_cast<std::size_t>(p)];
  }
  return P;
}

Eigen::MatrixXd assemble_X(const ReducedGeometry &geom, const TensorDiff &diff)
{
  const Eigen::VectorXd w = weights_of(geom, diff.grid());
  const int d = geom.d;
  std::vector<double> a(geom.size * d);
  for (std::size_t p = 0; p < geom.size; p++)
  {
    for (int i = 0; i < d; i++)
    {
      a[p * d + i] = w[static_cast<Eigen::Index>(p)] * geom.beta[p * d + i];
    }
  }
  return diff.skew_first_order(a, w);
}

void assemble_energy_forms(const ReducedGeometry &geom, const TensorDiff &diff,
                           const DiscretizationOptions &opts, Eigen::MatrixXd &q1, Eigen::VectorXd &q2)
{
  const SpectralGrid &grid = diff.grid();
  const std::size_t dd = static_cast<std::size_t>(geom.d * geom.d);
  const double cell = grid.cell_volume();
  std::vector<double> coef(geom.size * dd);
  q2.resize(static_cast<Eigen::Index>(geom.size));
  for (std::size_t p = 0; p < geom.size; p++)
  {
    const double c = geom.sqrt_det_h[p] * cell;
    for (std::size_t k = 0; k < dd; k++)
    {
      coef[p * dd + k] = 0.5 * c * geom.htinv[p * dd + k] / geom.N[p];
    }
    q2[static_cast<Eigen::Index>(p)] = 0.5 * c / geom.N[p];
  }
  const std::vector<double> pen = opts.nyquist_penalty ? nyquist_penalty(grid, coef) : std::vector<double>{};
  q1 = diff.stiffness(coef, pen);
  for (std::size_t p = 0; p < geom.size; p++)
  {
    const double c = geom.sqrt_det_h[p] * cell;
    q1(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) += 0.5 * c * geom.N[p] * geom.V[p];
  }
}

double lambda_cutoff(const StationaryModel &model, const SpectralGrid &grid, double fraction)
{
  double kmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.dim(); i++)
  {
    kmin = std::min(kmin, std::numbers::pi * grid.points(i) / grid.length(i));
  }
  return fraction * kmin * min_phase_speed(model, grid);
}

OperatorMatrices assemble(const StationaryModel &model, const SpectralGrid &grid,
                          const DiscretizationOptions &opts)
{
  OperatorMatrices m;
  m.grid = grid;
  m.geom = reduce_geometry(model, grid);
  const TensorDiff diff(grid);
  if (opts.dealias || !opts.nyquist_penalty)
  {
    m.geom.W = reduced_potential(m.geom, diff, opts);
  }
  m.weights = weights_of(m.geom, grid);
  const std::vector<double> coef = stiffness_coef(m.geom, m.weights);
  const std::vector<double> pen = opts.nyquist_penalty ? nyquist_penalty(grid, coef) : std::vector<double>{};
  m.stiffness = diff.stiffness(coef, pen);
  m.P = m.stiffness;
  for (Eigen::Index p = 0; p < m.P.rows(); p++)
  {
    m.P.row(p) /= m.weights[p];
    m.P(p, p) += m.geom.W[static_cast<std::size_t>(p)];
  }
  m.has_shift = model.has_shift();
  if (m.has_shift)
  {
    m.X = assemble_X(m.geom, diff);
  }
  assemble_energy_forms(m.geom, diff, opts, m.q1, m.q2);
  m.h_weights.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t p = 0; p < grid.size(); p++)
  {
    m.h_weights[static_cast<Eigen::Index>(p)] = m.geom.sqrt_det_h[p] * grid.cell_volume();
  }
  m.lambda_cutoff = lambda_cutoff(model, grid, opts.cutoff_fraction);
  return m;
}

void dump_matrices(const std::string &path, const OperatorMatrices &mats)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw NumericalError("cannot open " + path + " for writing");
  }
  auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char *>(&v), 4); };
  auto put64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char *>(&v), 8); };
  auto putd = [&](double v) { out.write(reinterpret_cast<const char *>(&v), 8); };
  struct Entry
  {
    const char *name;
    Eigen::MatrixXd value;
  };
  std::vector<Entry> entries = {{"P", mats.P}, {"q1", mats.q1}, {"q2", mats.q2}, {"weights", mats.weights}};
  if (!mats.x_is_zero())
  {
    entries.insert(entries.begin() + 1, Entry{"X", mats.X});
  }
  out.write("KGSM", 4);
  put32(1);
  put32(static_cast<std::uint32_t>(entries.size()));
  for (const auto &e : entries)
  {
    const std::string name = e.name;
    put32(static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put64(static_cast<std::uint64_t>(e.value.rows()));
    put64(static_cast<std::uint64_t>(e.value.cols()));
    for (Eigen::Index r = 0; r < e.value.rows(); r++)
    {
      for (Eigen::Index c = 0; c < e.value.cols(); c++)
      {
        putd(e.value(r, c));
        putd(0.0);
      }
    }
  }
  if (!out)
  {
    throw NumericalError("write failed for " + path);
  }
}

}  // namespace kgspec
