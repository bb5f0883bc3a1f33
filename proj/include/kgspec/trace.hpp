// SPDX-License-Identifier: Apache-2.0
//
// Counting function, Weyl-law fit, Gaussian-smoothed wave trace and its
// singularities at classical periods.
//
//   T(t)  = sum_j m_j exp(-(lambda_j/Lambda)^2) exp(i lambda_j t)
//   T+(t) = same sum over lambda_j > 0
//
// Near an isolated period T_g the half trace behaves like a K(t - T_g) with
// K(s) = -i int_0^inf exp(i tau s) exp(-(tau/Lambda)^2) dtau.

#pragma once

#include <limits>
#include <string>
#include <vector>
#include "kgspec/model.hpp"
#include "kgspec/orbits.hpp"
#include "kgspec/pencil.hpp"

namespace kgspec
{

// A real spectral line with a (possibly non-integer) weight.
struct SpectralLine
{
  double lambda = 0.0;
  double weight = 1.0;
};

struct TraceInput
{
  std::vector<SpectralLine> lines;  // trusted real modes
  std::vector<cplx> complex_modes;  // excluded from the sums
  double cutoff = 0.0;              // trust cutoff of the solve
};

// Trusted modes of a spectrum, real ones as unit-weight lines.
TraceInput trace_input(const SpectrumResult &spec, double tol_real = 1e-7);

struct CountingFunction
{
  std::vector<double> thresholds;  // distinct non-negative lambdas, ascending
  std::vector<double> counts;      // N_Z at each threshold
  int complex_excluded = 0;

  double operator()(double lambda) const;
};

CountingFunction counting_function(const TraceInput &in);

struct WeylFit
{
  double c_fit = 0.0;
  double c_theory = 0.0;
  double rel_err = 0.0;
  double remainder_exponent = std::numeric_limits<double>::quiet_NaN();  // observed, never asserted
  double lo = 0.0, hi = 0.0;
  double smoothing = 0.0;
  int levels_in_window = 0;
};

struct WeylOptions
{
  double min_window_ratio = 1.5;
  int samples = 200;
};

// Fit of c lambda^{n-1} + lower powers to the Gaussian-smoothed symmetric count
// (1/2) #{j : |lambda_j| <= lambda} on [lo, hi]. c_theory = Vol(N_{H<=1}) / (2 pi)^{n-1}.
WeylFit weyl_fit(const TraceInput &in, int n, double volume, double lo, double hi, const WeylOptions &opts = {});

struct TraceProfile
{
  std::vector<double> times;
  std::vector<cplx> values;  // T(t)
  std::vector<cplx> half;    // T+(t)
  double Lambda = 0.0;
  int lines_used = 0;
  double truncation_factor = 0.0;  // exp(-(cutoff/Lambda)^2)
  double complex_bound = 0.0;      // sum over excluded complex modes of e^{|Im| t_max} e^{-(Re/Lambda)^2}
};

struct TraceOptions
{
  double min_cutoff_ratio = 3.0;  // cutoff >= ratio * Lambda
  double tol_zero = 1e-6;         // lines below this go to T only, not T+
};

// Uniform time grid [t0, t1] with spacing 1 / (samples_per_width * Lambda).
std::vector<double> trace_times(double t0, double t1, double Lambda, int samples_per_width = 8);

TraceProfile smoothed_trace(const TraceInput &in, const std::vector<double> &times, double Lambda,
                            const TraceOptions &opts = {});

// K(s) for window width Lambda, by quadrature; K_Lambda(s) = Lambda K_1(Lambda s).
cplx singularity_kernel(double s, double Lambda);

// One entry per distinct classical period.
struct ClassicalPeriod
{
  double T = 0.0;
  std::vector<int> orbit_ids;
  bool degenerate = false;
  double predicted_modulus = std::numeric_limits<double>::quiet_NaN();  // sum T# / (2 pi |det(I-P)|^{1/2})
};

std::vector<ClassicalPeriod> classical_periods(const std::vector<PeriodicOrbit> &orbits, double tol = 1e-6);

struct AmplitudeFit
{
  cplx a = 0.0;
  cplx b0 = 0.0, b1 = 0.0;  // local linear background
  double residual = 0.0;    // relative rms of the fit
  bool clustered = false;   // another period within cluster_radius / Lambda: fit refused
  int samples = 0;
};

struct AmplitudeOptions
{
  double half_width = 2.5;      // fit window |t - T| <= half_width / Lambda
  double cluster_radius = 5.0;  // refusal radius in units of 1 / Lambda
};

AmplitudeFit fit_singularity_amplitude(const TraceProfile &profile, double T,
                                       const std::vector<double> &other_periods = {},
                                       const AmplitudeOptions &opts = {});

struct Peak
{
  double t_peak = 0.0;
  double height = 0.0;  // |T(t_peak)|
  bool matched = false;
  int period_index = -1;
  double matched_period = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> orbit_ids;
  AmplitudeFit fit;  // at the matched period; only when not clustered
  bool fitted = false;
  double predicted_modulus = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // |a_fit| / predicted
};

struct PeakReport
{
  std::vector<Peak> peaks;  // ascending t_peak
  double floor = 0.0;
  double t_min = 0.0;
  std::vector<int> unmatched_peaks;     // indices into peaks
  std::vector<int> missing_periods;     // visible classical periods without a peak
  std::vector<int> visible_periods;
  bool peak_before_shortest = false;    // a peak strictly inside (t_min, T_min - tol)
};

struct PeakOptions
{
  double floor_mads = 5.0;
  double t_min_widths = 3.0;  // t_min = t_min_widths / Lambda
  double match_widths = 3.0;  // match tolerance in units of 1 / Lambda
  AmplitudeOptions amplitude;
};

// Local maxima of |T| above median + 5 MAD for t > t_min, matched two-sided to
// the classical periods. Degenerate periods count as visible; non-degenerate
// ones when the predicted peak height |a| Lambda sqrt(pi) / 2 clears the floor.
PeakReport detect_peaks(const TraceProfile &profile, const std::vector<ClassicalPeriod> &periods,
                        const PeakOptions &opts = {});

// Lines lambda_j = j 2 pi / T, j >= 1, with weight |a| 2 pi / T: the half trace
// near t = T equals i |a| K(t - T) up to a smooth background.
TraceInput synthetic_orbit_spectrum(double T, double modulus, double lambda_max);

struct OriginScaling
{
  std::vector<double> Lambdas, values;
  double exponent = 0.0;        // fitted d log T(0) / d log Lambda
  double constant_ratio = 0.0;  // T(0) / ((n-1) c Gamma((n-1)/2) Lambda^{n-1}) at the largest Lambda
};

OriginScaling trace_origin_scaling(const TraceInput &in, int n, double volume, const std::vector<double> &Lambdas);

}  // namespace kgspec
