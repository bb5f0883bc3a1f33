// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <cmath>
#include <numbers>
#include "kgspec/discretization.hpp"
#include "kgspec/errors.hpp"
#include "kgspec/trace.hpp"

using namespace kgspec;
using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TraceInput circle_lines(int kmax)
{
  TraceInput in;
  in.cutoff = kmax + 0.5;
  in.lines.push_back({0.0, 2.0});
  for (int k = 1; k <= kmax; k++)
  {
    in.lines.push_back({double(k), 2.0});
    in.lines.push_back({double(-k), 2.0});
  }
  return in;
}

}  // namespace

// -i int_0^inf e^{i tau s} e^{-tau^2 / Lambda^2} d tau by a plain trapezoid rule.
TEST(Trace, SingularityKernelMatchesDirectQuadrature)
{
  const double Lambda = 6.0;
  for (double s : {0.0, 0.05, 0.3, -0.8, 2.0})
  {
    const int n = 200000;
    const double h = 8.0 * Lambda / n;
    cplx acc = 0.5;
    for (int j = 1; j <= n; j++)
      acc += std::exp(cplx(-(j * h) * (j * h) / (Lambda * Lambda), j * h * s));
    const cplx ref = cplx(0, -1) * acc * h;
    EXPECT_LT(std::abs(singularity_kernel(s, Lambda) - ref), 1e-7 * std::abs(ref)) << s;
  }
}

TEST(Trace, CountingFunctionOfTheCircle)
{
  const CountingFunction N = counting_function(circle_lines(20));
  EXPECT_DOUBLE_EQ(N(-0.1), 0.0);
  EXPECT_DOUBLE_EQ(N(0.0), 2.0);
  EXPECT_DOUBLE_EQ(N(5.5), 12.0);
  EXPECT_DOUBLE_EQ(N(6.0), 14.0);
}

TEST(Trace, WeylFitOnTheExactCircleSpectrum)
{
  const TraceInput in = circle_lines(60);
  const WeylFit w = weyl_fit(in, 2, 2 * kTwoPi, 15.0, 30.0);
  EXPECT_NEAR(w.c_theory, 2.0, 1e-12);
  EXPECT_LT(w.rel_err, 1e-3);
}

TEST(Trace, RefusesCutoffsBelowThreeLambda)
{
  const TraceInput in = circle_lines(20);
  EXPECT_THROW(smoothed_trace(in, trace_times(0, 5, 8.0), 8.0), ConfigError);
  EXPECT_NO_THROW(smoothed_trace(in, trace_times(0, 5, 6.0), 6.0));
}

// The exact circle trace is a sum of Gaussians at 2 pi k; the half trace near
// T = 2 pi carries two orbits of amplitude T# / (2 pi) each.
TEST(Trace, CirclePeakAmplitudeAndLocation)
{
  const double Lambda = 6.0;
  const TraceInput in = circle_lines(60);
  const TraceProfile p = smoothed_trace(in, trace_times(0, 14, Lambda), Lambda);
  ClassicalPeriod c1{kTwoPi, {0, 1}, false, 2.0}, c2{2 * kTwoPi, {2, 3}, false, 2.0};
  const PeakReport r = detect_peaks(p, {c1, c2});
  ASSERT_EQ(r.peaks.size(), 2u);
  EXPECT_TRUE(r.unmatched_peaks.empty());
  EXPECT_TRUE(r.missing_periods.empty());
  EXPECT_NEAR(r.peaks[0].t_peak, kTwoPi, 1e-3);
  ASSERT_TRUE(r.peaks[0].fitted);
  EXPECT_NEAR(std::abs(r.peaks[0].fit.a), 2.0, 0.02);
}

TEST(Trace, SyntheticOrbitAmplitudeWithinOnePercent)
{
  for (double Lambda : {8.0, 16.0})
  {
    const TraceInput in = synthetic_orbit_spectrum(2.9, 0.8, 6 * Lambda);
    const TraceProfile p = smoothed_trace(in, trace_times(0, 7, Lambda), Lambda);
    const AmplitudeFit f = fit_singularity_amplitude(p, 2.9);
    EXPECT_FALSE(f.clustered);
    EXPECT_NEAR(std::abs(f.a), 0.8, 0.008) << Lambda;
  }
}

TEST(Trace, AmplitudeFitRefusesClusteredPeriods)
{
  const TraceInput in = synthetic_orbit_spectrum(3.0, 1.0, 48);
  const TraceProfile p = smoothed_trace(in, trace_times(0, 5, 8.0), 8.0);
  EXPECT_TRUE(fit_singularity_amplitude(p, 3.0, {3.0, 3.3}).clustered);
  EXPECT_FALSE(fit_singularity_amplitude(p, 3.0, {3.0, 4.5}).clustered);
}

TEST(Trace, OriginGrowthOnTheTorus)
{
  const StationaryModel m = build_model({{"n", 3}, {"lengths", {kTwoPi, kTwoPi}}});
  const SpectralGrid g({128, 128}, m.lengths);
  const TraceInput in = trace_input(solve_spectrum_fourier(m, g));
  const OriginScaling sc = trace_origin_scaling(in, 3, phase_space_volume(m, g), {3, 6});
  EXPECT_NEAR(sc.exponent, 2.0, 1e-3);
  EXPECT_NEAR(sc.constant_ratio, 1.0, 1e-3);
}

TEST(Trace, ClassicalPeriodsGroupOrbitsAndSumAmplitudes)
{
  PeriodicOrbit a, b, c;
  a.period = b.period = 5.0;
  a.primitive_period = b.primitive_period = 5.0;
  a.det_I_minus_P = b.det_I_minus_P = 4.0;
  c.period = 7.0;
  c.primitive_period = 7.0;
  c.det_I_minus_P = 0.0;
  c.stability = "degenerate";
  const auto cp = classical_periods({a, b, c});
  ASSERT_EQ(cp.size(), 2u);
  EXPECT_NEAR(cp[0].predicted_modulus, 2 * 5.0 / (kTwoPi * 2.0), 1e-12);
  EXPECT_TRUE(cp[1].degenerate);
}
