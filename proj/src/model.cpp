// SPDX-License-Identifier: Apache-2.0

#include "kgspec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include "kgspec/discretization.hpp"
#include "kgspec/smallmat.hpp"

namespace kgspec
{

using nlohmann::json;

std::string family_name(Family f)
{
  switch (f)
  {
    case Family::Ultrastatic:
      return "ultrastatic";
    case Family::StaticConformal:
      return "static_conformal";
    case Family::PPWave:
      return "ppwave";
    default:
      return "generic";
  }
}

namespace
{

std::string fmt17(double v)
{
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Field parse_field(const json &j, const std::string &ptr, const Expr::VarLookup &vars,
                  const std::vector<double> &lengths)
{
  if (j.is_number())
  {
    return Field::constant(j.get<double>());
  }
  if (j.is_string())
  {
    try
    {
      return Field(Expr::parse(j.get<std::string>(), vars));
    }
    catch (const ConfigError &e)
    {
      throw ConfigError(ptr, e.what());
    }
  }
  if (j.is_object() && j.contains("grid"))
  {
    for (auto it = j.begin(); it != j.end(); ++it)
    {
      if (it.key() != "grid" && it.key() != "points")
      {
        throw ConfigError(ptr + "/" + it.key(), "unknown key");
      }
    }
    const auto &g = j.at("grid");
    if (!g.is_array())
    {
      throw ConfigError(ptr + "/grid", "expected an array of samples");
    }
    std::vector<double> samples;
    for (std::size_t k = 0; k < g.size(); k++)
    {
      if (!g[k].is_number())
      {
        throw ConfigError(ptr + "/grid/" + std::to_string(k), "expected a number");
      }
      samples.push_back(g[k].get<double>());
    }
    const std::size_t d = lengths.size();
    std::vector<int> points;
    if (j.contains("points"))
    {
      points = j.at("points").get<std::vector<int>>();
      if (points.size() != d)
      {
        throw ConfigError(ptr + "/points", "need one count per axis");
      }
    }
    else
    {
      const double side = std::round(std::pow(static_cast<double>(samples.size()), 1.0 / d));
      points.assign(d, static_cast<int>(side));
    }
    try
    {
      return Field(TrigInterpolant(points, lengths, samples));
    }
    catch (const ConfigError &e)
    {
      throw ConfigError(ptr, e.what());
    }
  }
  throw ConfigError(ptr, "expected a number, an expression string or {\"grid\": [...]}");
}

void check_keys(const json &cfg, const std::set<std::string> &allowed)
{
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
  {
    if (!allowed.count(it.key()))
    {
      throw ConfigError("/" + it.key(), "unknown key");
    }
  }
}

std::vector<double> parse_lengths(const json &cfg, std::size_t count)
{
  if (!cfg.contains("lengths"))
  {
    throw ConfigError("/lengths", "missing required field 'lengths'");
  }
  const auto &a = cfg.at("lengths");
  if (!a.is_array() || a.size() != count)
  {
    throw ConfigError("/lengths", "expected an array of " + std::to_string(count) + " lengths");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); i++)
  {
    if (!a[i].is_number() || !(a[i].get<double>() > 0.0))
    {
      throw ConfigError("/lengths/" + std::to_string(i), "lengths must be positive numbers");
    }
    out.push_back(a[i].get<double>());
  }
  return out;
}

std::string expr_text(const json &j, const std::string &ptr)
{
  if (j.is_number())
  {
    return fmt17(j.get<double>());
  }
  if (j.is_string())
  {
    return j.get<std::string>();
  }
  throw ConfigError(ptr, "expected a number or an expression string");
}

// Node-by-node checks of the standard-form hypotheses on the validation grid.
void validate(const StationaryModel &m, const std::vector<int> &points)
{
  const int d = m.d();
  const SpectralGrid grid(points, m.lengths);
  double x[kMaxDim];
  for (std::size_t k = 0; k < grid.size(); k++)
  {
    grid.node(k, x);
    const PointGeometry g = m.geometry_at(x);
    if (!(g.N > 0.0) || !std::isfinite(g.N))
    {
      throw ConfigError("/lapse", "lapse must be positive; N = " + fmt17(g.N) + " at node " +
                                      std::to_string(k));
    }
    for (int i = 0; i < d; i++)
    {
      for (int j = 0; j < i; j++)
      {
        if (std::abs(g.h[i * d + j] - g.h[j * d + i]) > 1e-12 * (1.0 + std::abs(g.h[i * d + j])))
        {
          throw ConfigError("/metric", "metric must be symmetric");
        }
      }
    }
    // Leading principal minors.
    double minor1 = g.h[0];
    double minor2 = d >= 2 ? g.h[0] * g.h[d + 1] - g.h[1] * g.h[d] : 1.0;
    double minor3 = d >= 3 ? small_det(3, g.h) : 1.0;
    if (!(minor1 > 0.0 && minor2 > 0.0 && minor3 > 0.0))
    {
      throw ConfigError("/metric", "metric must be positive definite at every node");
    }
    const double q = g.N * g.N - g.beta_sq;
    if (!(q > 0.0))
    {
      throw ConfigError("/shift", "N^2 - |beta|_h^2 = " + fmt17(q) +
                                      " <= 0: the Killing field is not timelike");
    }
  }
  // Periodicity across each face.
  auto check_field = [&](const Field &f, const std::string &ptr)
  {
    for (int axis = 0; axis < d; axis++)
    {
      for (std::size_t k = 0; k < grid.size(); k++)
      {
        int multi[kMaxDim];
        grid.index(k, multi);
        if (multi[axis] != 0)
        {
          continue;
        }
        grid.node(k, x);
        const double a = f(x);
        x[axis] += m.lengths[axis];
        const double b = f(x);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        {
          throw ConfigError(ptr, "field is not periodic along axis " + std::to_string(axis + 1) +
                                     " (" + fmt17(a) + " vs " + fmt17(b) + ")");
        }
      }
    }
  };
  check_field(m.lapse, "/lapse");
  check_field(m.potential, "/potential");
  for (int i = 0; i < d; i++)
  {
    check_field(m.shift[i], "/shift/" + std::to_string(i));
    for (int j = 0; j < d; j++)
    {
      check_field(m.metric[i * d + j], "/metric/" + std::to_string(i) + "/" + std::to_string(j));
    }
  }
}

StationaryModel build_ppwave(const json &cfg, const ModelOptions &opts)
{
  check_keys(cfg, {"n", "family", "H", "L", "alpha", "lengths", "potential"});
  for (const char *key : {"H", "L", "alpha"})
  {
    if (!cfg.contains(key))
    {
      throw ConfigError(std::string("/") + key,
                        std::string("ppwave family requires field '") + key + "'");
    }
  }
  StationaryModel m;
  m.n = cfg.at("n").get<int>();
  if (m.n < 3)
  {
    throw ConfigError("/n", "ppwave family needs n >= 3");
  }
  m.family = Family::PPWave;
  PPWaveParams pp;
  if (!cfg.at("L").is_number() || !(cfg.at("L").get<double>() > 0.0))
  {
    throw ConfigError("/L", "L must be a positive number");
  }
  if (!cfg.at("alpha").is_number())
  {
    throw ConfigError("/alpha", "alpha must be a number");
  }
  pp.L = cfg.at("L").get<double>();
  pp.alpha = cfg.at("alpha").get<double>();
  pp.base_lengths = parse_lengths(cfg, static_cast<std::size_t>(m.n - 2));
  const int nb = m.n - 2;
  // Base coordinates y1..y_{n-2} (alias y) sit after sigma in the quotient.
  auto quotient_vars = [nb](std::string_view name) -> int
  {
    if (name == "y")
      return 1;
    if (name.size() >= 2 && name[0] == 'y')
    {
      int k = 0;
      for (std::size_t i = 1; i < name.size(); i++)
      {
        if (name[i] < '0' || name[i] > '9')
          return -1;
        k = 10 * k + (name[i] - '0');
      }
      if (k >= 1 && k <= nb)
        return k;
    }
    return -1;
  };
  auto base_vars = [nb](std::string_view name) -> int
  {
    if (name == "y")
      return 0;
    if (name.size() >= 2 && name[0] == 'y')
    {
      int k = 0;
      for (std::size_t i = 1; i < name.size(); i++)
      {
        if (name[i] < '0' || name[i] > '9')
          return -1;
        k = 10 * k + (name[i] - '0');
      }
      if (k >= 1 && k <= nb)
        return k - 1;
    }
    return -1;
  };
  const std::string H = expr_text(cfg.at("H"), "/H");
  try
  {
    pp.H = Field(Expr::parse(H, base_vars));
  }
  catch (const ConfigError &e)
  {
    throw ConfigError("/H", e.what());
  }
  const std::string A = fmt17(pp.alpha);
  m.lengths.push_back(pp.alpha * pp.L);
  for (double b : pp.base_lengths)
  {
    m.lengths.push_back(b);
  }
  if (!(pp.alpha * pp.L > 0.0))
  {
    throw ConfigError("/alpha", "alpha must be positive");
  }
  const int d = m.d();
  auto q = [&](const std::string &text, const std::string &ptr)
  {
    try
    {
      return Field(Expr::parse(text, quotient_vars));
    }
    catch (const ConfigError &e)
    {
      throw ConfigError(ptr, e.what());
    }
  };
  // Quotient by (t, x) ~ (t + L, x + alpha L): tau = t - x / alpha, sigma = x.
  m.lapse = q(A + "/sqrt(2*" + A + "-(" + H + "))", "/H");
  m.shift.assign(d, Field::constant(0.0));
  m.shift[0] = q("1-(" + H + ")/" + A, "/H");
  m.metric.assign(d * d, Field::constant(0.0));
  m.metric[0] = q("(2*" + A + "-(" + H + "))/(" + A + "*" + A + ")", "/H");
  for (int i = 1; i < d; i++)
  {
    m.metric[i * d + i] = Field::constant(1.0);
  }
  if (cfg.contains("potential"))
  {
    m.potential = q(expr_text(cfg.at("potential"), "/potential"), "/potential");
  }
  // Profile checks on the base grid: H > 0 and alpha > max H / 2.
  {
    std::vector<int> pts = opts.validation_points;
    pts.resize(static_cast<std::size_t>(nb), 64);
    const SpectralGrid base(pts, pp.base_lengths);
    double y[kMaxDim];
    for (std::size_t k = 0; k < base.size(); k++)
    {
      base.node(k, y);
      const double h = pp.H(y);
      if (!(h > 0.0))
      {
        throw ConfigError("/H", "profile H must be positive; H = " + fmt17(h));
      }
      if (!(pp.alpha > 0.5 * h))
      {
        throw ConfigError("/alpha", "need alpha > max H / 2 for a spacelike identification");
      }
    }
  }
  m.ppwave = std::move(pp);
  m.description = cfg;
  return m;
}

}  // namespace

bool StationaryModel::has_shift() const
{
  for (const auto &f : shift)
  {
    if (!(f.is_constant() && f.constant_value() == 0.0))
    {
      return true;
    }
  }
  return false;
}

bool StationaryModel::constant_coefficients() const
{
  if (!lapse.is_constant() || !potential.is_constant())
  {
    return false;
  }
  for (const auto &f : shift)
  {
    if (!f.is_constant())
      return false;
  }
  for (const auto &f : metric)
  {
    if (!f.is_constant())
      return false;
  }
  return true;
}

PointGeometry StationaryModel::geometry_at(const double *x) const
{
  PointGeometry g;
  const int dd = d();
  g.d = dd;
  fields(x, g.N, g.eta, g.h, g.V);
  small_inverse(dd, g.h, g.hinv);
  g.sqrt_det_h = std::sqrt(small_det(dd, g.h));
  g.beta_sq = 0.0;
  for (int i = 0; i < dd; i++)
  {
    g.beta[i] = 0.0;
    for (int j = 0; j < dd; j++)
    {
      g.beta[i] += g.hinv[i * dd + j] * g.eta[j];
    }
    g.beta_sq += g.beta[i] * g.eta[i];
  }
  for (int i = 0; i < dd; i++)
  {
    for (int j = 0; j < dd; j++)
    {
      g.htinv[i * dd + j] = g.N * g.N * g.hinv[i * dd + j] - g.beta[i] * g.beta[j];
    }
  }
  return g;
}

StationaryModel build_model(const json &cfg, const ModelOptions &opts)
{
  if (!cfg.is_object())
  {
    throw ConfigError("", "model description must be a JSON object");
  }
  if (!cfg.contains("n"))
  {
    throw ConfigError("/n", "missing required field 'n'");
  }
  if (!cfg.at("n").is_number_integer())
  {
    throw ConfigError("/n", "n must be an integer");
  }
  const int n = cfg.at("n").get<int>();
  if (n < 2)
  {
    throw ConfigError("/n", "need n >= 2 (at least one spatial dimension)");
  }
  if (n > kMaxDim + 1)
  {
    throw ConfigError("/n", "at most " + std::to_string(kMaxDim) + " spatial dimensions supported");
  }
  Family family = Family::Generic;
  if (cfg.contains("family"))
  {
    if (!cfg.at("family").is_string())
    {
      throw ConfigError("/family", "expected a string");
    }
    const std::string f = cfg.at("family").get<std::string>();
    if (f == "generic")
      family = Family::Generic;
    else if (f == "ultrastatic")
      family = Family::Ultrastatic;
    else if (f == "static_conformal")
      family = Family::StaticConformal;
    else if (f == "ppwave")
      family = Family::PPWave;
    else
      throw ConfigError("/family", "unknown family '" + f + "'");
  }
  std::vector<int> points = opts.validation_points;
  StationaryModel m;
  if (family == Family::PPWave)
  {
    m = build_ppwave(cfg, opts);
  }
  else
  {
    check_keys(cfg, {"n", "family", "lengths", "lapse", "shift", "metric", "potential"});
    m.n = n;
    m.family = family;
    const int d = n - 1;
    m.lengths = parse_lengths(cfg, static_cast<std::size_t>(d));
    const auto vars = Expr::standard_vars(d);
    if (cfg.contains("lapse"))
    {
      m.lapse = parse_field(cfg.at("lapse"), "/lapse", vars, m.lengths);
    }
    if (cfg.contains("potential"))
    {
      m.potential = parse_field(cfg.at("potential"), "/potential", vars, m.lengths);
    }
    m.shift.assign(d, Field::constant(0.0));
    if (cfg.contains("shift"))
    {
      const auto &s = cfg.at("shift");
      if (!s.is_array() || s.size() != static_cast<std::size_t>(d))
      {
        throw ConfigError("/shift", "expected " + std::to_string(d) + " covector components");
      }
      for (int i = 0; i < d; i++)
      {
        m.shift[i] = parse_field(s[i], "/shift/" + std::to_string(i), vars, m.lengths);
      }
    }
    std::vector<std::string> base_metric(d * d, "0");
    for (int i = 0; i < d; i++)
    {
      base_metric[i * d + i] = "1";
    }
    m.metric.assign(d * d, Field::constant(0.0));
    for (int i = 0; i < d; i++)
    {
      m.metric[i * d + i] = Field::constant(1.0);
    }
    if (cfg.contains("metric"))
    {
      const auto &h = cfg.at("metric");
      if (!h.is_array() || h.size() != static_cast<std::size_t>(d))
      {
        throw ConfigError("/metric", "expected a " + std::to_string(d) + "x" + std::to_string(d) +
                                         " matrix");
      }
      for (int i = 0; i < d; i++)
      {
        if (!h[i].is_array() || h[i].size() != static_cast<std::size_t>(d))
        {
          throw ConfigError("/metric/" + std::to_string(i), "expected a row of " +
                                                                std::to_string(d) + " entries");
        }
        for (int j = 0; j < d; j++)
        {
          const std::string ptr = "/metric/" + std::to_string(i) + "/" + std::to_string(j);
          m.metric[i * d + j] = parse_field(h[i][j], ptr, vars, m.lengths);
          if (h[i][j].is_number() || h[i][j].is_string())
          {
            base_metric[i * d + j] = expr_text(h[i][j], ptr);
          }
        }
      }
    }
    if (family == Family::Ultrastatic)
    {
      if (cfg.contains("lapse") && !m.lapse.is_constant())
      {
        throw ConfigError("/lapse", "ultrastatic family has N = 1");
      }
      if (cfg.contains("lapse") && m.lapse.constant_value() != 1.0)
      {
        throw ConfigError("/lapse", "ultrastatic family has N = 1");
      }
      if (m.has_shift())
      {
        throw ConfigError("/shift", "ultrastatic family has zero shift");
      }
    }
    if (family == Family::StaticConformal)
    {
      if (m.has_shift())
      {
        throw ConfigError("/shift", "static_conformal family has zero shift");
      }
      if (!cfg.contains("lapse"))
      {
        throw ConfigError("/lapse", "static_conformal family requires a lapse expression");
      }
      const std::string N = expr_text(cfg.at("lapse"), "/lapse");
      // g = N^2 (-dt^2 + h0): the spatial metric is N^2 h0.
      for (int i = 0; i < d * d; i++)
      {
        m.metric[i] = Field(Expr::parse("(" + N + ")^2*(" + base_metric[i] + ")", vars));
      }
    }
    m.description = cfg;
  }
  points.resize(static_cast<std::size_t>(m.d()), 64);
  validate(m, points);
  return m;
}

double unit_ball_volume(int k)
{
  return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

double unit_sphere_area(int k)
{
  return 2.0 * std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k);
}

namespace
{

// Trapezoid sum of N (N^2 - |beta|^2)^{-n/2} dVol_h.
double volume_integral(const StationaryModel &model, const SpectralGrid &grid)
{
  double x[kMaxDim];
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); k++)
  {
    grid.node(k, x);
    const PointGeometry g = model.geometry_at(x);
    const double q = g.N * g.N - g.beta_sq;
    acc += g.N * std::pow(q, -0.5 * model.n) * g.sqrt_det_h;
  }
  return acc * grid.cell_volume();
}

}  // namespace

double phase_space_volume(const StationaryModel &model, const SpectralGrid &grid)
{
  return unit_ball_volume(model.d()) * volume_integral(model, grid);
}

double symplectic_residue(const StationaryModel &model, const SpectralGrid &grid)
{
  return unit_sphere_area(model.d()) * volume_integral(model, grid);
}

ReducedGeometry reduce_geometry(const StationaryModel &model, const SpectralGrid &grid)
{
  const int d = model.d();
  const int n = model.n;
  if (grid.dim() != d)
  {
    throw ConfigError("grid dimension does not match the model");
  }
  ReducedGeometry r;
  r.n = n;
  r.d = d;
  r.size = grid.size();
  const std::size_t np = grid.size();
  r.N.resize(np);
  r.V.resize(np);
  r.beta_sq.resize(np);
  r.sqrt_det_h.resize(np);
  r.sqrt_det_ht.resize(np);
  r.Omega.resize(np);
  r.eta.resize(np * d);
  r.beta.resize(np * d);
  r.hinv.resize(np * d * d);
  r.htinv.resize(np * d * d);
  r.tilde_h.resize(np * d * d);
  double x[kMaxDim];
  for (std::size_t k = 0; k < np; k++)
  {
    grid.node(k, x);
    const PointGeometry g = model.geometry_at(x);
    const double q = g.N * g.N - g.beta_sq;
    if (!(q > 0.0))
    {
      throw ConfigError("/shift", "N^2 - |beta|^2 <= 0 at grid node " + std::to_string(k));
    }
    r.N[k] = g.N;
    r.V[k] = g.V;
    r.beta_sq[k] = g.beta_sq;
    r.sqrt_det_h[k] = g.sqrt_det_h;
    // |htilde|^{1/2} = sqrt|h| N^{2-n} (N^2 - |beta|^2)^{-1/2}
    r.sqrt_det_ht[k] = g.sqrt_det_h * std::pow(g.N, 2 - n) / std::sqrt(q);
    r.Omega[k] = std::pow(g.N, 0.5 * (n - 3)) * std::pow(q, 0.25);
    for (int i = 0; i < d; i++)
    {
      r.eta[k * d + i] = g.eta[i];
      r.beta[k * d + i] = g.beta[i];
    }
    double ht[kMaxDim * kMaxDim];
    small_inverse(d, g.htinv, ht);
    if (!(small_det(d, g.htinv) > 0.0))
    {
      throw NumericalError("reduced metric is not positive definite at node " + std::to_string(k));
    }
    for (int i = 0; i < d * d; i++)
    {
      r.hinv[k * d * d + i] = g.hinv[i];
      r.htinv[k * d * d + i] = g.htinv[i];
      r.tilde_h[k * d * d + i] = ht[i];
    }
  }
  const TensorDiff diff(grid);
  r.W = reduced_potential(r, diff, DiscretizationOptions{});
  return r;
}

FactorizabilityReport check_factorizability(const StationaryModel &model, const SpectralGrid &grid,
                                            double tol)
{
  FactorizabilityReport rep;
  const int d = model.d();
  if (!model.has_shift())
  {
    rep.defect = 0.0;
    rep.is_factorizable = true;
    return rep;
  }
  const ReducedGeometry r = reduce_geometry(model, grid);
  const TensorDiff diff(grid);
  const std::size_t np = grid.size();
  // Derivatives d_k htilde_ij and d_i beta^k on the grid.
  std::vector<Eigen::VectorXd> dht(static_cast<std::size_t>(d * d * d));
  std::vector<Eigen::VectorXd> dbeta(static_cast<std::size_t>(d * d));
  for (int ij = 0; ij < d * d; ij++)
  {
    Eigen::VectorXd f(np);
    for (std::size_t p = 0; p < np; p++)
    {
      f[p] = r.tilde_h[p * d * d + ij];
    }
    for (int k = 0; k < d; k++)
    {
      dht[ij * d + k] = diff.derivative(k, f);
    }
  }
  for (int kk = 0; kk < d; kk++)
  {
    Eigen::VectorXd f(np);
    for (std::size_t p = 0; p < np; p++)
    {
      f[p] = r.beta[p * d + kk];
    }
    for (int i = 0; i < d; i++)
    {
      dbeta[kk * d + i] = diff.derivative(i, f);
    }
  }
  double defect = 0.0, scale = 0.0;
  for (std::size_t p = 0; p < np; p++)
  {
    for (int i = 0; i < d; i++)
    {
      for (int j = 0; j < d; j++)
      {
        double lie = 0.0;
        for (int k = 0; k < d; k++)
        {
          lie += r.beta[p * d + k] * dht[(i * d + j) * d + k][p];
          lie += r.tilde_h[p * d * d + k * d + j] * dbeta[k * d + i][p];
          lie += r.tilde_h[p * d * d + i * d + k] * dbeta[k * d + j][p];
        }
        defect = std::max(defect, std::abs(lie));
        scale = std::max(scale, std::abs(r.tilde_h[p * d * d + i * d + j]));
      }
    }
  }
  rep.defect = defect / std::max(scale, 1e-300);
  rep.is_factorizable = rep.defect < tol;
  return rep;
}

double min_phase_speed(const StationaryModel &model, const SpectralGrid &grid)
{
  const int d = model.d();
  double x[kMaxDim];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); k++)
  {
    grid.node(k, x);
    const PointGeometry g = model.geometry_at(x);
    Eigen::MatrixXd hinv(d, d);
    for (int i = 0; i < d; i++)
    {
      for (int j = 0; j < d; j++)
      {
        hinv(i, j) = g.hinv[i * d + j];
      }
    }
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hinv).eigenvalues()(0);
    double bnorm = 0.0;
    for (int i = 0; i < d; i++)
    {
      bnorm += g.beta[i] * g.beta[i];
    }
    best = std::min(best, g.N * std::sqrt(lmin) - std::sqrt(bnorm));
  }
  return best;
}

}  // namespace kgspec
