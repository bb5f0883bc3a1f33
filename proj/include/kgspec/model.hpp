// SPDX-License-Identifier: Apache-2.0
//
// Stationary spacetimes in standard form on a flat torus Cauchy surface:
//
//   g = -(N^2 - |eta|_h^2) dt^2 + 2 dt eta + h,
//
// with lapse N, shift covector eta (beta^i = h^{ij} eta_j), spatial metric h
// and a time-independent potential V. The ppwave family is stored through its
// quotient model; the profile data is kept alongside for the reduced solvers.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>
#include <Eigen/Dense>
#include "json.hpp"
#include "kgspec/expr.hpp"
#include "kgspec/grid.hpp"

namespace kgspec
{

constexpr int kMaxDim = 3;

enum class Family
{
  Generic,
  Ultrastatic,
  StaticConformal,
  PPWave
};

std::string family_name(Family f);

struct PPWaveParams
{
  Field H;                           // profile on the base torus, coordinates y1..y_{n-2}
  double L = 0.0;                    // time period of the identification
  double alpha = 0.0;                // spatial shift per period is alpha * L
  std::vector<double> base_lengths;  // side lengths of the base torus S
};

// Pointwise geometry at one position (plain doubles).
struct PointGeometry
{
  int d = 0;
  double N = 0.0, V = 0.0;
  double eta[kMaxDim] = {};
  double beta[kMaxDim] = {};           // h^{ij} eta_j
  double h[kMaxDim * kMaxDim] = {};
  double hinv[kMaxDim * kMaxDim] = {};
  double htinv[kMaxDim * kMaxDim] = {};  // N^2 h^{-1} - beta beta
  double beta_sq = 0.0;                // |beta|_h^2
  double sqrt_det_h = 0.0;
};

struct StationaryModel
{
  int n = 2;
  std::vector<double> lengths;
  Field lapse = Field::constant(1.0);
  std::vector<Field> shift;   // covector components eta_i
  std::vector<Field> metric;  // h_ij, row-major d x d
  Field potential = Field::constant(0.0);
  Family family = Family::Generic;
  std::optional<PPWaveParams> ppwave;
  nlohmann::json description;  // normalized config, used for hashing and reports

  int d() const { return n - 1; }
  bool has_shift() const;
  bool constant_coefficients() const;
  PointGeometry geometry_at(const double *x) const;

  // Fields at a (possibly Jet-valued) point: N, eta_i, h_ij, V.
  template <class T>
  void fields(const T *x, T &N, T *eta, T *h, T &V) const
  {
    const int dd = d();
    N = lapse.eval(x);
    V = potential.eval(x);
    for (int i = 0; i < dd; i++)
    {
      eta[i] = shift[i].eval(x);
    }
    for (int i = 0; i < dd * dd; i++)
    {
      h[i] = metric[i].eval(x);
    }
  }
};

// Sampled reduced geometry on a grid. All arrays are indexed by grid node;
// tensor arrays carry d or d*d components per node (node-major).
struct ReducedGeometry
{
  int n = 2, d = 1;
  std::size_t size = 0;
  std::vector<double> N, V, eta, beta, hinv, htinv, tilde_h, sqrt_det_h, sqrt_det_ht, Omega, W;
  std::vector<double> beta_sq;
};

struct FactorizabilityReport
{
  bool is_factorizable = false;
  double defect = 0.0;
};

struct ModelOptions
{
  std::vector<int> validation_points;  // default 64 per axis
  bool dealias = false;                // 2/3-rule filtering of sampled fields
};

// Builds and validates a model from its JSON description. Throws ConfigError
// naming the JSON pointer of the offending field.
StationaryModel build_model(const nlohmann::json &cfg, const ModelOptions &opts = {});

ReducedGeometry reduce_geometry(const StationaryModel &model, const SpectralGrid &grid);

// Vol(N_{H<=1}) and res(H^{-n+1}) by the periodic trapezoid rule.
double phase_space_volume(const StationaryModel &model, const SpectralGrid &grid);
double symplectic_residue(const StationaryModel &model, const SpectralGrid &grid);
double unit_ball_volume(int k);
double unit_sphere_area(int k);  // area of S^{k-1} in R^k

FactorizabilityReport check_factorizability(const StationaryModel &model, const SpectralGrid &grid,
                                            double tol = 1e-8);

// Minimum over the grid and over unit Euclidean covectors of H(x, xi); the
// slowest phase speed, used by the trust cutoff.
double min_phase_speed(const StationaryModel &model, const SpectralGrid &grid);

}  // namespace kgspec
