#ifndef SPINFORCE_MECHANICS_HPP
#define SPINFORCE_MECHANICS_HPP

// The levitated resonator as a damped harmonic oscillator driven by the
// square-wave spin force and, optionally, the thermal Langevin force.

#include "core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spinforce {

struct OscillatorParams {
  double mass = 1.28e-4;     // kg
  double f0 = 17.6;          // Hz
  double Q = 55.0;
  double temperature = 300.0; // K

  double omega0() const { return 2.0 * pi * f0; }
  double stiffness() const { return mass * omega0() * omega0(); }
  double damping() const { return mass * omega0() / Q; } // kg/s

  void validate() const {
    if (!(mass > 0.0 && f0 > 0.0 && Q > 0.0 && temperature > 0.0))
      throw domain_error("OscillatorParams: mass, f0, Q and temperature must be > 0");
  }
};

/// Square wave: F_high for the first `duty` fraction of each period (shifted
/// by `phase` seconds), F_low for the rest.
struct DriveWaveform {
  double F_low = 0.0;  // N
  double F_high = 0.0; // N
  double duty = 0.5;
  double period = 1.0 / 17.6; // s
  double phase = 0.0;         // s
  double rise_time = 0.0;     // s; 0 switches instantly

  double delta() const { return F_high - F_low; }

  void validate() const {
    if (!(duty > 0.0 && duty < 1.0))
      throw DutyOutOfRange("DriveWaveform: duty must lie in (0, 1)");
    if (!(period > 0.0))
      throw domain_error("DriveWaveform: period must be > 0");
    if (!(rise_time >= 0.0))
      throw domain_error("DriveWaveform: rise_time must be >= 0");
  }

  /// Instantaneous target force at time t.
  double operator()(double t) const {
    double u = std::fmod((t - phase) / period, 1.0);
    if (u < 0.0)
      u += 1.0;
    return u < duty ? F_high : F_low;
  }
};

struct TimeSeries {
  double sample_rate = 2440.0; // Hz
  std::vector<double> samples; // m
  std::uint64_t seed = 0;

  double duration() const { return samples.size() / sample_rate; }
  double time(std::size_t i) const { return double(i) / sample_rate; }
};

struct SimulationOptions {
  double sample_rate = 2440.0;
  int substeps = 4; // integrator steps per output sample
  bool thermal_noise = true;
  std::uint64_t seed = 1;
};

/// Integrates m z'' + (m w0 / Q) z' + m w0^2 z = F_drive(t) + F_thermal(t)
/// from rest at z = 0 with the Gronbech-Jensen-Farago Verlet scheme. The
/// thermal force is white with one-sided density 4 k_B T m w0 / Q, applied
/// as a Gaussian impulse of variance 2 k_B T (m w0 / Q) dt per step. The
/// scheme reproduces <z^2> = k_B T / (m w0^2) exactly for a harmonic well.
inline TimeSeries simulate(const OscillatorParams& osc, const DriveWaveform& drive,
                           double duration, const SimulationOptions& opt = {}) {
  osc.validate();
  drive.validate();
  if (!(opt.sample_rate > 0.0) || opt.substeps < 1)
    throw domain_error("simulate: sample rate must be > 0 and substeps >= 1");
  if (!(duration >= 10.0 * drive.period))
    throw TooShort("simulate: duration must cover at least 10 drive periods");
  const double dt = 1.0 / (opt.sample_rate * opt.substeps);
  const double steps_per_period = std::min(drive.period, 1.0 / osc.f0) / dt;
  if (!(steps_per_period >= 50.0) || !(osc.omega0() * dt < 0.2))
    throw UnstableStep("simulate: fewer than 50 steps per period; raise substeps");

  const double m = osc.mass;
  const double k = osc.stiffness();
  const double gamma = osc.damping();
  const double b = 1.0 / (1.0 + gamma * dt / (2.0 * m));
  const double a = (1.0 - gamma * dt / (2.0 * m)) * b;
  const double noise_sigma =
      opt.thermal_noise ? std::sqrt(2.0 * gamma * default_constants.k_B * osc.temperature * dt)
                        : 0.0;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto n_out = static_cast<std::size_t>(std::llround(duration * opt.sample_rate));
  TimeSeries ts;
  ts.sample_rate = opt.sample_rate;
  ts.seed = opt.seed;
  ts.samples.resize(n_out);

  // First-order lag toward the square-wave target when rise_time > 0.
  const double lag = drive.rise_time > 0.0 ? std::exp(-dt / drive.rise_time) : 0.0;
  double f_drive = drive(0.0);
  double z = 0.0, v = 0.0;
  double f = f_drive - k * z;
  std::size_t step = 0;
  for (std::size_t i = 0; i < n_out; ++i) {
    ts.samples[i] = z;
    for (int s = 0; s < opt.substeps; ++s, ++step) {
      const double beta = noise_sigma > 0.0 ? noise_sigma * normal(rng) : 0.0;
      const double z_next = z + b * dt * v + b * dt * dt / (2.0 * m) * f + b * dt / (2.0 * m) * beta;
      const double target = drive(double(step + 1) * dt);
      f_drive = lag > 0.0 ? target + (f_drive - target) * lag : target;
      const double f_next = f_drive - k * z_next;
      v = a * v + dt / (2.0 * m) * (a * f + f_next) + b / m * beta;
      z = z_next;
      f = f_next;
    }
    if (!std::isfinite(z) || !std::isfinite(v))
      throw UnstableStep("simulate: state diverged");
  }
  return ts;
}

/// Resonant steady-state amplitude of the fundamental under a square drive
/// of step dF and duty D: A = 2 Q sin(pi D) dF / (pi m w0^2).
inline double steady_state_amplitude(const OscillatorParams& osc, double delta_f, double duty) {
  if (!(duty > 0.0 && duty < 1.0))
    throw DutyOutOfRange("steady_state_amplitude: duty must lie in (0, 1)");
  return 2.0 * osc.Q * std::sin(pi * duty) * delta_f / (pi * osc.stiffness());
}

struct SegmentAverage {
  std::vector<double> waveform; // peak |value| normalized to 1
  std::vector<double> raw;      // mean displacement per phase bin (m)
  double peak = 0.0;            // max |raw - mean(raw)|
  std::size_t segments = 0;
};

/// Folds the series modulo `period` and averages each phase bin. Bins are
/// floor(period * fs) wide in samples; samples are binned by their exact
/// phase so a non-integer samples-per-period does not smear the average.
/// The mean of the folded waveform is removed before normalization.
inline SegmentAverage segment_average(const TimeSeries& ts, double period) {
  if (!(period > 0.0))
    throw domain_error("segment_average: period must be > 0");
  const double per_samples = period * ts.sample_rate;
  const auto nbins = static_cast<std::size_t>(std::floor(per_samples));
  if (nbins < 2 || ts.samples.size() < 2.0 * per_samples)
    throw TooShort("segment_average: need at least two full periods");
  std::vector<double> sum(nbins, 0.0);
  std::vector<std::size_t> count(nbins, 0);
  for (std::size_t i = 0; i < ts.samples.size(); ++i) {
    const double cycles = double(i) / per_samples;
    const double frac = cycles - std::floor(cycles);
    const auto bin = std::min(nbins - 1, static_cast<std::size_t>(frac * nbins));
    sum[bin] += ts.samples[i];
    ++count[bin];
  }
  SegmentAverage out;
  out.segments = static_cast<std::size_t>(ts.samples.size() / per_samples);
  out.raw.resize(nbins);
  double mean = 0.0;
  for (std::size_t j = 0; j < nbins; ++j) {
    out.raw[j] = sum[j] / double(count[j]);
    mean += out.raw[j];
  }
  mean /= double(nbins);
  out.waveform.resize(nbins);
  for (std::size_t j = 0; j < nbins; ++j)
    out.peak = std::max(out.peak, std::abs(out.raw[j] - mean));
  for (std::size_t j = 0; j < nbins; ++j)
    out.waveform[j] = out.peak > 0.0 ? (out.raw[j] - mean) / out.peak : 0.0;
  return out;
}

/// Pearson correlation of a folded waveform with its least-squares
/// single-harmonic fit.
inline double sinusoid_correlation(const std::vector<double>& w) {
  const std::size_t n = w.size();
  if (n < 3)
    return 0.0;
  double c = 0.0, s = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    mean += w[j];
  mean /= double(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ph = 2.0 * pi * (j + 0.5) / double(n);
    c += (w[j] - mean) * std::cos(ph);
    s += (w[j] - mean) * std::sin(ph);
  }
  c *= 2.0 / n;
  s *= 2.0 / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double ph = 2.0 * pi * (j + 0.5) / double(n);
    const double fit = c * std::cos(ph) + s * std::sin(ph);
    const double x = w[j] - mean;
    sxy += x * fit;
    sxx += x * x;
    syy += fit * fit;
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

} // namespace spinforce

#endif // SPINFORCE_MECHANICS_HPP
