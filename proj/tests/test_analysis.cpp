#include <spinforce/analysis.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace spinforce;

namespace {

TimeSeries sinusoid(double amplitude, double f, double duration, double fs = 2440.0,
                    double phase = 0.3) {
  TimeSeries ts;
  ts.sample_rate = fs;
  ts.samples.resize(static_cast<std::size_t>(duration * fs));
  for (std::size_t i = 0; i < ts.samples.size(); ++i)
    ts.samples[i] = amplitude * std::sin(2.0 * pi * f * ts.time(i) + phase);
  return ts;
}

double variance(const std::vector<double>& x) {
  double m = 0.0, v = 0.0;
  for (double a : x)
    m += a / x.size();
  for (double a : x)
    v += (a - m) * (a - m) / x.size();
  return v;
}

double area_near(const PSDEstimate& psd, double f0, int bins) {
  double s = 0.0;
  for (std::size_t k = 0; k < psd.values.size(); ++k)
    if (std::abs(psd.frequencies[k] - f0) <= bins * psd.resolution_bandwidth * (1 + 1e-9))
      s += psd.values[k];
  return s * psd.resolution_bandwidth;
}

} // namespace

TEST(Psd, UnitSinusoidPeakAreaIsOne) {
  for (Window w : {Window::hann, Window::rectangular}) {
    const auto psd = estimate_psd(sinusoid(1.0, 17.6, 400.0), 100.0, w);
    EXPECT_NEAR(psd.resolution_bandwidth, 0.01, 1e-15);
    EXPECT_NEAR(area_near(psd, 17.6, 3), 1.0, 0.02) << to_string(w);
  }
}

TEST(Psd, OffBinSinusoidStillIntegratesToAmplitudeSquared) {
  const auto psd = estimate_psd(sinusoid(2.0, 17.6037, 600.0), 100.0, Window::hann);
  EXPECT_NEAR(area_near(psd, 17.6037, 5), 4.0, 0.02 * 4.0);
}

TEST(Psd, WhiteNoiseParseval) {
  TimeSeries ts;
  ts.sample_rate = 2440.0;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  ts.samples.resize(2440 * 600);
  for (double& x : ts.samples)
    x = n(rng);
  for (Window w : {Window::hann, Window::rectangular}) {
    const auto psd = estimate_psd(ts, 10.0, w);
    EXPECT_NEAR(psd.integral(), 2.0 * 9.0, 0.05 * 18.0);
    // flat: mean level across the band = 2 sigma^2 / (fs / 2)
    EXPECT_NEAR(psd.values[psd.values.size() / 3], 2.0 * 9.0 / 1220.0, 0.5 * 2.0 * 9.0 / 1220.0);
  }
}

TEST(Psd, DeterministicParseval) {
  TimeSeries ts = sinusoid(1.5, 17.6, 400.0);
  const auto h2 = sinusoid(0.7, 52.8, 400.0, 2440.0, 1.1);
  const auto h3 = sinusoid(0.2, 300.0, 400.0, 2440.0, 2.0);
  for (std::size_t i = 0; i < ts.samples.size(); ++i)
    ts.samples[i] += h2.samples[i] + h3.samples[i];
  for (Window w : {Window::hann, Window::rectangular}) {
    const auto psd = estimate_psd(ts, 100.0, w);
    EXPECT_NEAR(psd.integral(), 2.0 * variance(ts.samples), 0.01 * 2.0 * variance(ts.samples));
  }
}

TEST(Psd, NonNegativeAndResolution) {
  const auto psd = estimate_psd(sinusoid(1.0, 5.0, 50.0), 10.0);
  EXPECT_NEAR(psd.frequencies[1] - psd.frequencies[0], 0.1, 1e-12);
  for (double v : psd.values)
    EXPECT_GE(v, 0.0);
  EXPECT_EQ(psd.segments, 9u);
}

TEST(Psd, TooShort) {
  EXPECT_THROW(estimate_psd(sinusoid(1.0, 5.0, 150.0), 100.0), TooShort);
}

TEST(Amplitude, RecoversSinusoidAndExcludesThirdHarmonic) {
  TimeSeries ts = sinusoid(8e-8, 17.6, 1200.0);
  const auto h3 = sinusoid(8e-8 / 3.0, 3.0 * 17.6, 1200.0);
  for (std::size_t i = 0; i < ts.samples.size(); ++i)
    ts.samples[i] += h3.samples[i];
  const auto psd = estimate_psd(ts, 100.0);
  const auto a = amplitude_from_peak(psd, 17.6, default_band_halfwidth(psd));
  EXPECT_NEAR(a.amplitude, 8e-8, 0.01 * 8e-8);
  EXPECT_LT(a.band_lo, 17.6);
  EXPECT_GT(a.band_hi, 17.6);
  EXPECT_TRUE(a.background_subtracted);
}

TEST(Amplitude, BackgroundSubtractionRemovesFlatFloor) {
  TimeSeries ts = sinusoid(1e-8, 17.6, 1200.0);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 2e-8);
  for (double& x : ts.samples)
    x += n(rng);
  const auto psd = estimate_psd(ts, 100.0);
  const auto a = amplitude_from_peak(psd, 17.6, 0.05);
  EXPECT_NEAR(a.amplitude, 1e-8, 0.1 * 1e-8);
  EXPECT_GT(a.amplitude_raw, a.amplitude);
}

TEST(Amplitude, BandErrors) {
  const auto psd = estimate_psd(sinusoid(1.0, 5.0, 50.0), 10.0);
  EXPECT_THROW(amplitude_from_peak(psd, 5.0, 0.0), BandOutOfRange);
  EXPECT_THROW(amplitude_from_peak(psd, 5.0, 0.01), BandOutOfRange); // below one bin
  EXPECT_THROW(amplitude_from_peak(psd, 1219.9, 0.5), BandOutOfRange);
  EXPECT_THROW(amplitude_from_peak(psd, 0.2, 0.5), BandOutOfRange);
}

TEST(Inversion, RoundTripIsExact) {
  const OscillatorParams osc{};
  for (double df : {1e-12, 5e-10, 1e-9, 5e-9, 1e-8, 1e-6})
    for (double duty : {0.01, 0.2, 0.48, 0.5, 0.73, 0.99}) {
      const double a = steady_state_amplitude(osc, df, duty);
      EXPECT_NEAR(force_from_amplitude(a, osc, duty), df, 1e-12 * df);
    }
}

TEST(Inversion, Errors) {
  const OscillatorParams osc{};
  EXPECT_THROW(force_from_amplitude(1e-7, osc, 1.0), DutyOutOfRange);
  EXPECT_THROW(force_from_amplitude(-1e-7, osc, 0.5), domain_error);
}

TEST(Window, NamesRoundTrip) {
  EXPECT_EQ(window_from_string("hann"), Window::hann);
  EXPECT_EQ(window_from_string(to_string(Window::rectangular)), Window::rectangular);
  EXPECT_THROW(window_from_string("kaiser"), domain_error);
}

TEST(Brownian, PsdIntegralMatchesEquipartition) {
  const OscillatorParams osc{};
  SimulationOptions o;
  o.seed = 12;
  DriveWaveform none;
  none.period = 1.0 / osc.f0;
  const auto ts = simulate(osc, none, 1200.0, o);
  const auto psd = estimate_psd(ts, 100.0);
  const double ref = 2.0 * default_constants.k_B * osc.temperature / osc.stiffness();
  EXPECT_NEAR(psd.integral(), ref, 0.15 * ref);
  // Lorentzian peak at f0
  std::size_t kmax = 0;
  for (std::size_t k = 1; k < psd.values.size(); ++k)
    if (psd.values[k] > psd.values[kmax])
      kmax = k;
  EXPECT_NEAR(psd.frequencies[kmax], osc.f0, 0.5);
}

TEST(Recovery, NoiseFreeSquareDrive) {
  const OscillatorParams osc{};
  DriveWaveform d;
  d.F_high = 3e-9;
  d.duty = 0.48;
  d.period = 1.0 / osc.f0;
  SimulationOptions o;
  o.thermal_noise = false;
  const auto r = recover_force(simulate(osc, d, 1200.0, o), osc, d.duty);
  EXPECT_NEAR(r.delta_F, 3e-9, 0.05 * 3e-9);
}
