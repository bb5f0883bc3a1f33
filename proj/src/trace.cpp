// SPDX-License-Identifier: Apache-2.0

#include "kgspec/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>
#include "kgspec/errors.hpp"

namespace kgspec
{

namespace
{

constexpr double kPi = std::numbers::pi;

double median(std::vector<double> v)
{
  if (v.empty())
    return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0)
    m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Least-squares slope of log y against log x.
double log_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    if (!(y[i] > 0.0) || !(x[i] > 0.0))
      continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    k++;
  }
  if (k < 2)
    return std::numeric_limits<double>::quiet_NaN();
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace

TraceInput trace_input(const SpectrumResult &spec, double tol_real)
{
  TraceInput in;
  in.cutoff = spec.lambda_cutoff;
  for (const EigenMode &m : spec.modes)
  {
    if (!m.trusted)
      continue;
    if (std::abs(m.lambda.imag()) <= tol_real)
      in.lines.push_back({m.lambda.real(), 1.0});
    else
      in.complex_modes.push_back(m.lambda);
  }
  std::sort(in.lines.begin(), in.lines.end(),
            [](const SpectralLine &a, const SpectralLine &b) { return a.lambda < b.lambda; });
  return in;
}

double CountingFunction::operator()(double lambda) const
{
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), lambda);
  if (it == thresholds.begin())
    return 0.0;
  return counts[static_cast<std::size_t>(it - thresholds.begin()) - 1];
}

CountingFunction counting_function(const TraceInput &in)
{
  CountingFunction f;
  f.complex_excluded = static_cast<int>(in.complex_modes.size());
  std::vector<SpectralLine> pos;
  for (const SpectralLine &l : in.lines)
  {
    if (l.lambda >= 0.0)
      pos.push_back(l);
  }
  std::sort(pos.begin(), pos.end(), [](const SpectralLine &a, const SpectralLine &b) { return a.lambda < b.lambda; });
  double acc = 0.0;
  for (const SpectralLine &l : pos)
  {
    acc += l.weight;
    if (!f.thresholds.empty() && f.thresholds.back() == l.lambda)
    {
      f.counts.back() = acc;
    }
    else
    {
      f.thresholds.push_back(l.lambda);
      f.counts.push_back(acc);
    }
  }
  return f;
}

WeylFit weyl_fit(const TraceInput &in, int n, double volume, double lo, double hi, const WeylOptions &opts)
{
  if (!(lo > 0.0) || hi < opts.min_window_ratio * lo)
  {
    throw ConfigError("Weyl window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] is narrower than a factor " +
                      std::to_string(opts.min_window_ratio));
  }
  if (in.cutoff > 0.0 && hi > in.cutoff)
  {
    throw ConfigError("Weyl window extends past the trusted cutoff");
  }
  WeylFit fit;
  fit.lo = lo;
  fit.hi = hi;
  fit.smoothing = 0.25 * (hi - lo);
  fit.c_theory = volume / std::pow(2.0 * kPi, n - 1);

  std::vector<int> powers = {n - 1, n - 2};
  if (n >= 3)
    powers.push_back(0);

  const int m = opts.samples;
  Eigen::MatrixXd A(m, static_cast<Eigen::Index>(powers.size()));
  Eigen::VectorXd y(m);
  std::vector<double> xs(static_cast<std::size_t>(m)), rem(static_cast<std::size_t>(m));
  for (int i = 0; i < m; i++)
  {
    const double x = lo + (hi - lo) * i / (m - 1);
    double s = 0.0;
    for (const SpectralLine &l : in.lines)
    {
      s += 0.5 * l.weight * normal_cdf((x - std::abs(l.lambda)) / fit.smoothing);
    }
    y[i] = s;
    for (std::size_t k = 0; k < powers.size(); k++)
    {
      A(i, static_cast<Eigen::Index>(k)) = std::pow(x, powers[k]);
    }
    xs[static_cast<std::size_t>(i)] = x;
    rem[static_cast<std::size_t>(i)] = std::abs(s - fit.c_theory * std::pow(x, n - 1));
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  fit.c_fit = coef[0];
  fit.rel_err = std::abs(fit.c_fit - fit.c_theory) / std::abs(fit.c_theory);
  fit.remainder_exponent = log_slope(xs, rem);
  for (const SpectralLine &l : in.lines)
  {
    if (l.lambda >= lo && l.lambda <= hi)
      fit.levels_in_window++;
  }
  return fit;
}

std::vector<double> trace_times(double t0, double t1, double Lambda, int samples_per_width)
{
  const double dt = 1.0 / (samples_per_width * Lambda);
  const auto count = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; i++)
  {
    t[i] = t0 + dt * static_cast<double>(i);
  }
  return t;
}

TraceProfile smoothed_trace(const TraceInput &in, const std::vector<double> &times, double Lambda,
                            const TraceOptions &opts)
{
  if (!(Lambda > 0.0))
    throw ConfigError("window width must be positive");
  if (in.cutoff > 0.0 && in.cutoff < opts.min_cutoff_ratio * Lambda)
  {
    throw ConfigError("window width " + std::to_string(Lambda) + " too large for the trusted cutoff " +
                      std::to_string(in.cutoff));
  }
  TraceProfile p;
  p.times = times;
  p.Lambda = Lambda;
  p.values.assign(times.size(), 0.0);
  p.half.assign(times.size(), 0.0);
  p.truncation_factor = in.cutoff > 0.0 ? std::exp(-std::pow(in.cutoff / Lambda, 2)) : 0.0;
  for (const SpectralLine &l : in.lines)
  {
    const double w = l.weight * std::exp(-std::pow(l.lambda / Lambda, 2));
    if (w == 0.0)
      continue;
    p.lines_used++;
    const bool positive = l.lambda > opts.tol_zero;
    for (std::size_t k = 0; k < times.size(); k++)
    {
      const cplx e = w * std::polar(1.0, l.lambda * times[k]);
      p.values[k] += e;
      if (positive)
        p.half[k] += e;
    }
  }
  const double t_max = times.empty() ? 0.0 : std::max(std::abs(times.front()), std::abs(times.back()));
  for (const cplx &z : in.complex_modes)
  {
    p.complex_bound += std::exp(std::abs(z.imag()) * t_max) * std::exp(-std::pow(z.real() / Lambda, 2));
  }
  return p;
}

cplx singularity_kernel(double s, double Lambda)
{
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double x = Lambda * s;
  // exp(-u^2) < 1e-21 past u = 7.
  const double re = GK::integrate([x](double u) { return std::exp(-u * u) * std::cos(u * x); }, 0.0, 7.0, 12, 1e-14);
  const double im = GK::integrate([x](double u) { return std::exp(-u * u) * std::sin(u * x); }, 0.0, 7.0, 12, 1e-14);
  // -i (re + i im)
  return Lambda * cplx(im, -re);
}

std::vector<ClassicalPeriod> classical_periods(const std::vector<PeriodicOrbit> &orbits, double tol)
{
  std::vector<int> order(orbits.size());
  for (std::size_t i = 0; i < order.size(); i++)
    order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return orbits[static_cast<std::size_t>(a)].period < orbits[static_cast<std::size_t>(b)].period;
  });
  std::vector<ClassicalPeriod> out;
  for (int id : order)
  {
    const PeriodicOrbit &o = orbits[static_cast<std::size_t>(id)];
    if (out.empty() || std::abs(o.period - out.back().T) > tol * (1.0 + o.period))
    {
      ClassicalPeriod c;
      c.T = o.period;
      c.predicted_modulus = 0.0;
      out.push_back(c);
    }
    ClassicalPeriod &c = out.back();
    c.orbit_ids.push_back(id);
    if (o.stability == "degenerate")
      c.degenerate = true;
    else
      c.predicted_modulus += o.primitive_period / (2.0 * kPi * std::sqrt(std::abs(o.det_I_minus_P)));
  }
  for (ClassicalPeriod &c : out)
  {
    if (c.degenerate)
      c.predicted_modulus = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

AmplitudeFit fit_singularity_amplitude(const TraceProfile &profile, double T, const std::vector<double> &other_periods,
                                       const AmplitudeOptions &opts)
{
  AmplitudeFit fit;
  const double L = profile.Lambda;
  for (double other : other_periods)
  {
    if (std::abs(other - T) > 1e-9 * (1.0 + T) && std::abs(other - T) < opts.cluster_radius / L)
    {
      fit.clustered = true;
      return fit;
    }
  }
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < profile.times.size(); k++)
  {
    if (std::abs(profile.times[k] - T) <= opts.half_width / L)
      idx.push_back(k);
  }
  fit.samples = static_cast<int>(idx.size());
  if (idx.size() < 4)
  {
    throw NumericalError("too few trace samples around the candidate period");
  }
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd A(m, 3);
  Eigen::VectorXcd y(m);
  for (Eigen::Index i = 0; i < m; i++)
  {
    const double s = profile.times[idx[static_cast<std::size_t>(i)]] - T;
    A(i, 0) = singularity_kernel(s, L);
    A(i, 1) = 1.0;
    A(i, 2) = s * L;
    y[i] = profile.half[idx[static_cast<std::size_t>(i)]];
  }
  const Eigen::VectorXcd c = A.colPivHouseholderQr().solve(y);
  fit.a = c[0];
  fit.b0 = c[1];
  fit.b1 = c[2] * L;
  fit.residual = (A * c - y).norm() / std::max(y.norm(), 1e-300);
  return fit;
}

PeakReport detect_peaks(const TraceProfile &profile, const std::vector<ClassicalPeriod> &periods,
                        const PeakOptions &opts)
{
  PeakReport rep;
  const double L = profile.Lambda;
  const double tol = opts.match_widths / L;
  rep.t_min = opts.t_min_widths / L;
  const std::size_t nt = profile.times.size();
  if (nt >= 2 && profile.times[1] - profile.times[0] > 0.5 / L)
  {
    throw NumericalError("trace sampled coarser than half a window width");
  }
  std::vector<double> mag(nt);
  std::vector<double> tail;
  for (std::size_t k = 0; k < nt; k++)
  {
    mag[k] = std::abs(profile.values[k]);
    if (profile.times[k] > rep.t_min)
      tail.push_back(mag[k]);
  }
  const double med = median(tail);
  std::vector<double> dev(tail.size());
  for (std::size_t k = 0; k < tail.size(); k++)
    dev[k] = std::abs(tail[k] - med);
  rep.floor = med + opts.floor_mads * median(dev);

  for (std::size_t k = 1; k + 1 < nt; k++)
  {
    if (profile.times[k] <= rep.t_min || mag[k] <= rep.floor)
      continue;
    if (!(mag[k] >= mag[k - 1] && mag[k] > mag[k + 1]))
      continue;
    Peak p;
    // Parabolic refinement through the three samples.
    const double dt = profile.times[k + 1] - profile.times[k];
    const double den = mag[k - 1] - 2.0 * mag[k] + mag[k + 1];
    const double off = den != 0.0 ? 0.5 * (mag[k - 1] - mag[k + 1]) / den : 0.0;
    p.t_peak = profile.times[k] + std::clamp(off, -0.5, 0.5) * dt;
    p.height = mag[k];
    rep.peaks.push_back(p);
  }

  std::vector<double> all_T;
  for (const ClassicalPeriod &c : periods)
    all_T.push_back(c.T);
  const double t_end = nt ? profile.times.back() : 0.0;
  for (std::size_t i = 0; i < rep.peaks.size(); i++)
  {
    Peak &p = rep.peaks[i];
    double best = tol;
    for (std::size_t j = 0; j < periods.size(); j++)
    {
      const double d = std::abs(p.t_peak - periods[j].T);
      if (d <= best)
      {
        best = d;
        p.period_index = static_cast<int>(j);
      }
    }
    if (p.period_index < 0)
    {
      rep.unmatched_peaks.push_back(static_cast<int>(i));
      continue;
    }
    const ClassicalPeriod &c = periods[static_cast<std::size_t>(p.period_index)];
    p.matched = true;
    p.matched_period = c.T;
    p.orbit_ids = c.orbit_ids;
    p.predicted_modulus = c.predicted_modulus;
    if (c.T + opts.amplitude.half_width / L > t_end)
      continue;
    p.fit = fit_singularity_amplitude(profile, c.T, all_T, opts.amplitude);
    p.fitted = !p.fit.clustered;
    if (p.fitted && std::isfinite(p.predicted_modulus))
      p.ratio = std::abs(p.fit.a) / p.predicted_modulus;
  }

  const double height_scale = L * std::sqrt(kPi) / 2.0;
  double t_shortest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < periods.size(); j++)
  {
    const ClassicalPeriod &c = periods[j];
    if (c.T <= rep.t_min || c.T > t_end - tol)
      continue;
    t_shortest = std::min(t_shortest, c.T);
    const bool visible = c.degenerate || c.predicted_modulus * height_scale > rep.floor;
    if (!visible)
      continue;
    rep.visible_periods.push_back(static_cast<int>(j));
    const bool found = std::any_of(rep.peaks.begin(), rep.peaks.end(),
                                   [&](const Peak &p) { return std::abs(p.t_peak - c.T) <= tol; });
    if (!found)
      rep.missing_periods.push_back(static_cast<int>(j));
  }
  for (const Peak &p : rep.peaks)
  {
    if (p.t_peak < t_shortest - tol)
      rep.peak_before_shortest = true;
  }
  return rep;
}

TraceInput synthetic_orbit_spectrum(double T, double modulus, double lambda_max)
{
  TraceInput in;
  const double step = 2.0 * kPi / T;
  for (int j = 1; j * step <= lambda_max; j++)
  {
    in.lines.push_back({j * step, modulus * step});
  }
  in.cutoff = lambda_max;
  return in;
}

OriginScaling trace_origin_scaling(const TraceInput &in, int n, double volume, const std::vector<double> &Lambdas)
{
  OriginScaling s;
  s.Lambdas = Lambdas;
  for (double L : Lambdas)
  {
    double v = 0.0;
    for (const SpectralLine &l : in.lines)
      v += l.weight * std::exp(-std::pow(l.lambda / L, 2));
    s.values.push_back(v);
  }
  s.exponent = log_slope(s.Lambdas, s.values);
  if (!Lambdas.empty())
  {
    const double c = volume / std::pow(2.0 * kPi, n - 1);
    const double L = Lambdas.back();
    s.constant_ratio = s.values.back() / ((n - 1) * c * std::tgamma(0.5 * (n - 1)) * std::pow(L, n - 1));
  }
  return s;
}

}  // namespace kgspec
