#ifndef SPINFORCE_ANALYSIS_HPP
#define SPINFORCE_ANALYSIS_HPP

// Displacement PSD, resonance peak-area amplitude and the force inversion.
//
// PSD convention: S = 2 x (one-sided PSD), so a sinusoid of amplitude A
// integrates to A^2 over its peak and the full integral of S is twice the
// signal variance.

#include "core.hpp"
#include "mechanics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace spinforce {

enum class Window { hann, rectangular };

inline std::string to_string(Window w) {
  return w == Window::hann ? "hann" : "rectangular";
}

inline Window window_from_string(const std::string& s) {
  if (s == "hann")
    return Window::hann;
  if (s == "rectangular" || s == "rect" || s == "boxcar")
    return Window::rectangular;
  throw domain_error("unknown window '" + s + "' (expected hann or rectangular)");
}

struct PSDEstimate {
  std::vector<double> frequencies; // Hz
  std::vector<double> values;      // m^2/Hz, amplitude-squared convention
  Window window = Window::hann;
  double resolution_bandwidth = 0.0; // Hz, bin spacing = 1 / segment length
  std::size_t segments = 0;

  double integral() const {
    double s = 0.0;
    for (double v : values)
      s += v;
    return s * resolution_bandwidth;
  }
};

namespace detail {

// FFTW planning is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwR2C {
  explicit FftwR2C(std::size_t n) : n(n) {
    std::lock_guard lock(fftw_planner_mutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~FftwR2C() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  FftwR2C(const FftwR2C&) = delete;
  FftwR2C& operator=(const FftwR2C&) = delete;

  std::size_t n;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan{};
};

inline std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> v(n, 1.0);
  if (w == Window::hann)
    for (std::size_t i = 0; i < n; ++i)
      v[i] = 0.5 - 0.5 * std::cos(2.0 * pi * double(i) / double(n)); // periodic
  return v;
}

} // namespace detail

/// Averaged periodogram. Segments of `segment_length` seconds, 50% overlap for
/// the Hann window and none for the rectangular one, each with its mean
/// removed. Normalized by the window power sum so peak areas are exact.
inline PSDEstimate estimate_psd(const TimeSeries& ts, double segment_length,
                                Window window = Window::hann) {
  const auto nseg = static_cast<std::size_t>(std::llround(segment_length * ts.sample_rate));
  if (nseg < 4 || ts.samples.size() < 2 * nseg)
    throw TooShort("estimate_psd: series shorter than two segments");
  const std::size_t hop = window == Window::hann ? nseg / 2 : nseg;
  const std::size_t count = (ts.samples.size() - nseg) / hop + 1;
  const auto w = detail::make_window(window, nseg);
  double wpow = 0.0;
  for (double x : w)
    wpow += x * x;

  detail::FftwR2C fft(nseg);
  const std::size_t nbins = nseg / 2 + 1;
  std::vector<double> acc(nbins, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    const double* x = ts.samples.data() + s * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < nseg; ++i)
      mean += x[i];
    mean /= double(nseg);
    for (std::size_t i = 0; i < nseg; ++i)
      fft.in[i] = (x[i] - mean) * w[i];
    fftw_execute(fft.plan);
    for (std::size_t k = 0; k < nbins; ++k)
      acc[k] += fft.out[k][0] * fft.out[k][0] + fft.out[k][1] * fft.out[k][1];
  }

  PSDEstimate psd;
  psd.window = window;
  psd.segments = count;
  psd.resolution_bandwidth = ts.sample_rate / double(nseg);
  psd.frequencies.resize(nbins);
  psd.values.resize(nbins);
  const double norm = 1.0 / (double(count) * ts.sample_rate * wpow);
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = k == 0 || (nseg % 2 == 0 && k == nbins - 1);
    // one-sided doubling, then x2 for the amplitude-squared convention
    psd.frequencies[k] = double(k) * psd.resolution_bandwidth;
    psd.values[k] = (edge ? 2.0 : 4.0) * acc[k] * norm;
  }
  return psd;
}

struct AmplitudeEstimate {
  double amplitude = 0.0;     // m, background subtracted
  double amplitude_raw = 0.0; // m, plain band integral
  double band_lo = 0.0;       // Hz
  double band_hi = 0.0;       // Hz
  double background = 0.0;    // m^2/Hz, mean flank level
  bool background_subtracted = true;
};

struct BandStats {
  double band_sum = 0.0; // sum of S over band bins
  std::size_t band_bins = 0;
  double flank_mean = 0.0;
  std::size_t flank_bins = 0;
};

/// Band |f - f0| <= df and the two flanks df < |f - f0| <= 2 df.
inline BandStats band_stats(const PSDEstimate& psd, double f0, double delta_f) {
  if (psd.values.empty() || !(delta_f > 0.0))
    throw BandOutOfRange("band: empty PSD or non-positive half-width");
  const double fmax = psd.frequencies.back();
  if (f0 - 2.0 * delta_f < 0.0 || f0 + 2.0 * delta_f > fmax)
    throw BandOutOfRange("band: f0 +- 2 delta_f falls outside the PSD range");
  const double eps = 1e-9 * psd.resolution_bandwidth;
  BandStats b;
  double flank = 0.0;
  for (std::size_t k = 0; k < psd.values.size(); ++k) {
    const double d = std::abs(psd.frequencies[k] - f0);
    if (d <= delta_f + eps) {
      b.band_sum += psd.values[k];
      ++b.band_bins;
    } else if (d <= 2.0 * delta_f + eps) {
      flank += psd.values[k];
      ++b.flank_bins;
    }
  }
  if (b.band_bins == 0 || b.flank_bins == 0)
    throw BandOutOfRange("band: half-width is narrower than one PSD bin");
  b.flank_mean = flank / double(b.flank_bins);
  return b;
}

/// A^2 = integral of S over f0 +- delta_f, minus the flank-interpolated floor.
inline AmplitudeEstimate amplitude_from_peak(const PSDEstimate& psd, double f0, double delta_f) {
  const BandStats b = band_stats(psd, f0, delta_f);
  AmplitudeEstimate a;
  a.band_lo = f0 - delta_f;
  a.band_hi = f0 + delta_f;
  a.background = b.flank_mean;
  const double area = b.band_sum * psd.resolution_bandwidth;
  const double floor_area = b.flank_mean * double(b.band_bins) * psd.resolution_bandwidth;
  a.amplitude_raw = std::sqrt(area);
  a.amplitude = std::sqrt(std::max(0.0, area - floor_area));
  return a;
}

/// Mean PSD level in the band over the mean level of its flanks.
inline double peak_to_floor(const PSDEstimate& psd, double f0, double delta_f) {
  const BandStats b = band_stats(psd, f0, delta_f);
  return (b.band_sum / double(b.band_bins)) / b.flank_mean;
}

/// dF = (pi / 2) m (2 pi f0)^2 A / (Q sin(pi D)).
inline double force_from_amplitude(double amplitude, const OscillatorParams& osc, double duty) {
  if (!(duty > 0.0 && duty < 1.0))
    throw DutyOutOfRange("force_from_amplitude: duty must lie in (0, 1)");
  if (!(amplitude >= 0.0))
    throw domain_error("force_from_amplitude: amplitude must be >= 0");
  return 0.5 * pi * osc.stiffness() * amplitude / (osc.Q * std::sin(pi * duty));
}

inline double force_from_amplitude(const AmplitudeEstimate& a, const OscillatorParams& osc,
                                   double duty) {
  return force_from_amplitude(a.amplitude, osc, duty);
}

/// Default peak half-width: five resolution bandwidths.
inline double default_band_halfwidth(const PSDEstimate& psd) {
  return 5.0 * psd.resolution_bandwidth;
}

struct ForceRecovery {
  PSDEstimate psd;
  AmplitudeEstimate amplitude;
  double delta_F = 0.0;
};

/// estimate_psd -> amplitude_from_peak -> force_from_amplitude.
inline ForceRecovery recover_force(const TimeSeries& ts, const OscillatorParams& osc, double duty,
                                   double segment_length = 100.0, Window window = Window::hann,
                                   double band_halfwidth = 0.0) {
  ForceRecovery r;
  r.psd = estimate_psd(ts, segment_length, window);
  const double df = band_halfwidth > 0.0 ? band_halfwidth : default_band_halfwidth(r.psd);
  r.amplitude = amplitude_from_peak(r.psd, osc.f0, df);
  r.delta_F = force_from_amplitude(r.amplitude, osc, duty);
  return r;
}

} // namespace spinforce

#endif // SPINFORCE_ANALYSIS_HPP
