#ifndef SPINFORCE_SCENARIOS_HPP
#define SPINFORCE_SCENARIOS_HPP

// Figure-level pipelines. Each runner returns its tables in memory;
// write_outputs() renders them, a plotting script and a manifest to disk.

#include "analysis.hpp"
#include "config.hpp"
#include "force_model.hpp"
#include "io.hpp"
#include "mechanics.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace spinforce {

inline constexpr const char* version_string = "spinforce 1.0.0";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
      throw error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i)
        out << (i ? "," : "") << r[i];
      out << '\n';
    }
  }
};

inline std::string fmt(double v) { return format_double(v); }

struct RunOutput {
  std::map<std::string, Table> tables; // file name -> table
  std::string plot_script;             // python source, may be empty
};

inline SpinEnvironment environment_for(const Config& cfg, const Scenario& s) {
  SpinEnvironment env;
  env.rates = cfg.presets.rates.at(s.rates);
  env.temperature = s.temperature;
  return env;
}

/// Ensemble force for one (magnet, gap, power) point of a scenario.
inline ForceResult scenario_force(const Config& cfg, const Scenario& s, const std::string& magnet,
                                  double gap, double power_mw, bool polarizing = true) {
  const auto& mag = cfg.magnet(magnet, "scenarios." + s.name + ".magnet");
  const DiamondSpec d = place_above(mag, gap, cfg.presets.diamonds.at(s.diamond));
  IlluminationSpot spot = default_spot(d, power_mw, s.spot_diameter);
  spot.profile = s.spot_profile;
  EnsembleOptions opt;
  opt.scaling_factor = s.scaling_factor;
  return ensemble_force(d, spot, mag, polarizing, environment_for(cfg, s), opt);
}

/// Square drive between the thermal force and the thermal force plus the
/// scaled optical change.
inline DriveWaveform drive_for(const ForceResult& f, const OscillatorParams& osc, double duty,
                               double rise_time = 0.0) {
  DriveWaveform d;
  d.F_low = f.F_th;
  d.F_high = f.F_th + (f.F_GL - f.F_th) / f.scaling_factor;
  d.duty = duty;
  d.period = 1.0 / osc.f0;
  d.rise_time = rise_time;
  return d;
}

struct DrivenRun {
  TimeSeries series;
  ForceRecovery recovery;
  double model_amplitude = 0.0;
};

inline DrivenRun simulate_and_recover(const Scenario& s, const OscillatorParams& osc,
                                      const DriveWaveform& drive, std::uint64_t seed) {
  SimulationOptions so;
  so.sample_rate = s.sample_rate;
  so.thermal_noise = s.thermal_noise;
  so.seed = seed;
  DrivenRun r;
  r.series = simulate(osc, drive, s.duration, so);
  r.recovery = recover_force(r.series, osc, drive.duty, s.segment_length,
                             window_from_string(s.window), s.band_halfwidth);
  r.model_amplitude = steady_state_amplitude(osc, std::abs(drive.delta()), drive.duty);
  return r;
}

//
// Per-spin force versus the angle between NV axis and a uniform field
// B = field z with the single gradient component dB_z/dz = gradient.
//

struct Fig1cResult {
  std::vector<double> theta_deg;
  std::vector<double> intensities;
  std::vector<std::vector<double>> force; // [intensity][theta], N
  RunOutput output;
};

inline Fig1cResult run_fig1c(const Config& cfg, const Scenario& s, unsigned threads = 1) {
  const SpinEnvironment env = environment_for(cfg, s);
  Fig1cResult r;
  r.intensities = s.intensities;
  for (int k = 0; k < s.theta_points; ++k)
    r.theta_deg.push_back(90.0 * k / (s.theta_points - 1));
  Mat3 grad = Mat3::Zero();
  grad(2, 2) = s.gradient;
  const Vec3 b(0.0, 0.0, s.field);
  r.force.assign(r.intensities.size(), std::vector<double>(r.theta_deg.size()));
  const std::size_t n = r.intensities.size() * r.theta_deg.size();
  parallel_for(n, threads, [&](std::size_t idx) {
    const std::size_t i = idx / r.theta_deg.size(), k = idx % r.theta_deg.size();
    const NVOrientation o{r.theta_deg[k] * pi / 180.0, 0.0, 1};
    const Vec3 m = spin_moment(b, o, LaserDrive{r.intensities[i], true}, env);
    r.force[i][k] = per_spin_force(m, grad).z();
  });

  Table t;
  t.columns.push_back("theta_deg");
  for (double I : r.intensities)
    t.columns.push_back("fz_I" + fmt(I) + "_N");
  for (std::size_t k = 0; k < r.theta_deg.size(); ++k) {
    std::vector<std::string> row{fmt(r.theta_deg[k])};
    for (std::size_t i = 0; i < r.intensities.size(); ++i)
      row.push_back(fmt(r.force[i][k]));
    t.add(std::move(row));
  }
  r.output.tables["fig1c_force_vs_theta.csv"] = std::move(t);
  r.output.plot_script = R"py(import pandas as pd, matplotlib.pyplot as plt
d = pd.read_csv("fig1c_force_vs_theta.csv")
for c in d.columns[1:]:
    plt.plot(d["theta_deg"], d[c], label=c.replace("fz_I", "I=").replace("_N", " mW/mm^2"))
plt.xlabel("theta (deg)"); plt.ylabel("f_z per spin (N)"); plt.legend()
plt.savefig("fig1c.png", dpi=150)
)py";
  return r;
}

//
// Force and recovered force versus laser power and duty cycle.
//

struct Fig3Point {
  double power = 0.0;
  double duty = 0.0;
  ForceResult model;
  double model_amplitude = 0.0;
  double recovered_amplitude = 0.0;
  double recovered_delta_F = 0.0;
};

struct Fig3Result {
  std::vector<Fig3Point> points; // power-major
  RunOutput output;
};

inline Fig3Result run_fig3(const Config& cfg, const Scenario& s, unsigned threads = 1) {
  const OscillatorParams osc = cfg.presets.oscillators.at(s.oscillator);
  std::vector<ForceResult> model(s.powers.size());
  parallel_for(model.size(), threads, [&](std::size_t i) {
    model[i] = scenario_force(cfg, s, s.magnet, s.gap, s.powers[i]);
  });

  Fig3Result r;
  r.points.resize(s.powers.size() * s.duties.size());
  std::vector<PSDEstimate> psds(r.points.size());
  parallel_for(r.points.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / s.duties.size(), j = idx % s.duties.size();
    Fig3Point& p = r.points[idx];
    p.power = s.powers[i];
    p.duty = s.duties[j];
    p.model = model[i];
    const auto run = simulate_and_recover(s, osc, drive_for(model[i], osc, p.duty, s.rise_time),
                                          s.seed + idx);
    p.model_amplitude = run.model_amplitude;
    p.recovered_amplitude = run.recovery.amplitude.amplitude;
    p.recovered_delta_F = run.recovery.delta_F;
    psds[idx] = run.recovery.psd;
  });

  Table t;
  t.columns = {"power_mW", "intensity_mW_per_mm2", "duty", "F_th_N", "F_GL_N", "delta_F_model_N",
               "amplitude_model_m", "amplitude_recovered_m", "delta_F_recovered_N"};
  for (const auto& p : r.points)
    t.add({fmt(p.power), fmt(p.model.intensity), fmt(p.duty), fmt(p.model.F_th),
           fmt(p.model.F_GL), fmt(p.model.delta_F), fmt(p.model_amplitude),
           fmt(p.recovered_amplitude), fmt(p.recovered_delta_F)});
  r.output.tables["fig3_force_vs_power.csv"] = std::move(t);

  Table w;
  w.columns = {"power_mW", "duty", "f_Hz", "S_m2_per_Hz"};
  for (std::size_t idx = 0; idx < r.points.size(); ++idx) {
    const auto& psd = psds[idx];
    for (std::size_t k = 0; k < psd.frequencies.size(); ++k)
      if (std::abs(psd.frequencies[k] - osc.f0) <= 1.0)
        w.add({fmt(r.points[idx].power), fmt(r.points[idx].duty), fmt(psd.frequencies[k]),
               fmt(psd.values[k])});
  }
  r.output.tables["fig3_psd_waterfall.csv"] = std::move(w);
  r.output.plot_script = R"py(import pandas as pd, matplotlib.pyplot as plt
d = pd.read_csv("fig3_force_vs_power.csv")
for duty, g in d.groupby("duty"):
    plt.plot(g["power_mW"], g["delta_F_recovered_N"] * 1e9, "o", label=f"D={duty} recovered")
    plt.plot(g["power_mW"], g["delta_F_model_N"] * 1e9, "-", color="k")
plt.xlabel("laser power (mW)"); plt.ylabel("delta F (nN)"); plt.legend()
plt.savefig("fig3b.png", dpi=150)
)py";
  return r;
}

//
// Force versus gap for each magnet preset.
//

struct Fig4Point {
  std::string magnet;
  double gap = 0.0;
  double B_center = 0.0;
  double gradient_center = 0.0;
  ForceResult model;
};

struct Fig4Result {
  std::vector<Fig4Point> points; // magnet-major
  RunOutput output;
};

inline Fig4Result run_fig4(const Config& cfg, const Scenario& s, unsigned threads = 1) {
  Fig4Result r;
  r.points.resize(s.magnets.size() * s.gaps.size());
  const double power = s.powers.front();
  parallel_for(r.points.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / s.gaps.size(), j = idx % s.gaps.size();
    Fig4Point& p = r.points[idx];
    p.magnet = s.magnets[i];
    p.gap = s.gaps[j];
    p.model = scenario_force(cfg, s, p.magnet, p.gap, power);
    const auto& mag = cfg.magnet(p.magnet, "scenarios." + s.name + ".magnets");
    const DiamondSpec d = place_above(mag, p.gap, cfg.presets.diamonds.at(s.diamond));
    const Vec3 c = default_spot(d, power, s.spot_diameter).center;
    p.B_center = field_at(mag, c).norm();
    p.gradient_center = gradient_at(mag, c)(2, 2);
  });
  Table t;
  t.columns = {"magnet", "gap_m", "B_spot_T", "dBzdz_spot_T_per_m", "F_th_N", "F_GL_N",
               "delta_F_N"};
  for (const auto& p : r.points)
    t.add({p.magnet, fmt(p.gap), fmt(p.B_center), fmt(p.gradient_center), fmt(p.model.F_th),
           fmt(p.model.F_GL), fmt(p.model.delta_F)});
  r.output.tables["fig4_force_vs_gap.csv"] = std::move(t);
  r.output.plot_script = R"py(import pandas as pd, matplotlib.pyplot as plt
d = pd.read_csv("fig4_force_vs_gap.csv")
for name, g in d.groupby("magnet"):
    plt.plot(g["gap_m"] * 1e3, g["delta_F_N"] * 1e9, "o-", label=name)
plt.xlabel("gap d (mm)"); plt.ylabel("delta F (nN)"); plt.legend()
plt.savefig("fig4.png", dpi=150)
)py";
  return r;
}

//
// Driven trace, segment average and the magnet / wavelength controls.
//

struct Fig2Case {
  std::string name;
  double power = 0.0;
  double duty = 0.5;
  bool magnet = true;
  bool polarizing = true;
  double delta_F = 0.0;
  double amplitude = 0.0;      // recovered, m
  double peak_to_floor = 0.0;
  PSDEstimate psd;
};

struct Fig2Result {
  std::vector<Fig2Case> cases; // driven, magnet_on, magnet_off, ir_control
  SegmentAverage averaged;
  double sinusoid_correlation = 0.0;
  double trace_rms = 0.0; // m, driven trace after the first 10 s
  RunOutput output;
};

inline Fig2Result run_fig2(const Config& cfg, const Scenario& s, unsigned threads = 1) {
  const OscillatorParams osc = cfg.presets.oscillators.at(s.oscillator);
  const double p_main = s.powers.front();
  const double p_cmp = s.powers.size() > 1 ? s.powers[1] : p_main;
  const double d_main = s.duties.front();
  const double d_cmp = s.duties.size() > 1 ? s.duties[1] : d_main;

  Fig2Result r;
  r.cases = {{"driven_532nm", p_main, d_main, true, true},
             {"magnet_on_532nm", p_cmp, d_cmp, true, true},
             {"magnet_off_532nm", p_cmp, d_cmp, false, true},
             {"magnet_on_980nm", p_main, d_cmp, true, false}};
  std::vector<TimeSeries> series(r.cases.size());
  parallel_for(r.cases.size(), threads, [&](std::size_t i) {
    Fig2Case& c = r.cases[i];
    ForceResult f;
    if (c.magnet)
      f = scenario_force(cfg, s, s.magnet, s.gap, c.power, c.polarizing);
    const auto run = simulate_and_recover(s, osc, drive_for(f, osc, c.duty, s.rise_time),
                                          s.seed + i);
    c.delta_F = f.delta_F;
    c.amplitude = run.recovery.amplitude.amplitude;
    c.psd = run.recovery.psd;
    const double df = s.band_halfwidth > 0.0 ? s.band_halfwidth : default_band_halfwidth(c.psd);
    c.peak_to_floor = peak_to_floor(c.psd, osc.f0, df);
    series[i] = run.series;
  });

  const TimeSeries& driven = series.front();
  r.averaged = segment_average(driven, 1.0 / osc.f0);
  r.sinusoid_correlation = sinusoid_correlation(r.averaged.waveform);
  {
    const auto skip = static_cast<std::size_t>(10.0 * driven.sample_rate);
    double mean = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = skip; i < driven.samples.size(); ++i, ++n)
      mean += driven.samples[i];
    mean /= double(n);
    for (std::size_t i = skip; i < driven.samples.size(); ++i)
      sq += (driven.samples[i] - mean) * (driven.samples[i] - mean);
    r.trace_rms = std::sqrt(sq / double(n));
  }

  Table trace;
  trace.columns = {"t_s", "z_m"};
  const auto n_trace = std::min<std::size_t>(driven.samples.size(),
                                             static_cast<std::size_t>(10.0 * driven.sample_rate));
  for (std::size_t i = 0; i < n_trace; ++i)
    trace.add({fmt(driven.time(i)), fmt(driven.samples[i])});
  r.output.tables["fig2a_trace.csv"] = std::move(trace);

  Table avg;
  avg.columns = {"phase", "z_normalized", "z_m"};
  for (std::size_t j = 0; j < r.averaged.waveform.size(); ++j)
    avg.add({fmt((j + 0.5) / double(r.averaged.waveform.size())), fmt(r.averaged.waveform[j]),
             fmt(r.averaged.raw[j])});
  r.output.tables["fig2b_segment_average.csv"] = std::move(avg);

  auto psd_pair = [&](std::size_t a, std::size_t b) {
    Table t;
    t.columns = {"f_Hz", "S_" + r.cases[a].name, "S_" + r.cases[b].name};
    const auto& pa = r.cases[a].psd;
    const auto& pb = r.cases[b].psd;
    for (std::size_t k = 0; k < pa.frequencies.size() && pa.frequencies[k] <= 40.0; ++k)
      t.add({fmt(pa.frequencies[k]), fmt(pa.values[k]), fmt(pb.values[k])});
    return t;
  };
  r.output.tables["fig2c_psd_magnet.csv"] = psd_pair(1, 2);
  r.output.tables["fig2d_psd_wavelength.csv"] = psd_pair(1, 3);

  Table summary;
  summary.columns = {"case", "power_mW", "duty", "magnet", "polarizing", "delta_F_N",
                     "amplitude_recovered_m", "peak_to_floor"};
  for (const auto& c : r.cases)
    summary.add({c.name, fmt(c.power), fmt(c.duty), c.magnet ? "1" : "0", c.polarizing ? "1" : "0",
                 fmt(c.delta_F), fmt(c.amplitude), fmt(c.peak_to_floor)});
  r.output.tables["fig2_summary.csv"] = std::move(summary);
  r.output.plot_script = R"py(import pandas as pd, matplotlib.pyplot as plt
fig, ax = plt.subplots(2, 2, figsize=(10, 8))
a = pd.read_csv("fig2a_trace.csv"); ax[0, 0].plot(a["t_s"], a["z_m"] * 1e9); ax[0, 0].set_ylabel("z (nm)")
b = pd.read_csv("fig2b_segment_average.csv"); ax[0, 1].plot(b["phase"], b["z_normalized"])
c = pd.read_csv("fig2c_psd_magnet.csv")
for col in c.columns[1:]:
    ax[1, 0].semilogy(c["f_Hz"], c[col], label=col)
ax[1, 0].legend()
d = pd.read_csv("fig2d_psd_wavelength.csv")
for col in d.columns[1:]:
    ax[1, 1].semilogy(d["f_Hz"], d[col], label=col)
ax[1, 1].legend()
plt.savefig("fig2.png", dpi=150)
)py";
  return r;
}

//
// Model force over a gap x power grid for one magnet.
//

inline RunOutput run_sweep(const Config& cfg, const Scenario& s, unsigned threads = 1) {
  std::vector<ForceResult> out(s.gaps.size() * s.powers.size());
  parallel_for(out.size(), threads, [&](std::size_t idx) {
    out[idx] = scenario_force(cfg, s, s.magnet, s.gaps[idx / s.powers.size()],
                              s.powers[idx % s.powers.size()]);
  });
  Table t;
  t.columns = {"magnet", "gap_m", "power_mW", "F_th_N", "F_GL_N", "delta_F_N"};
  for (std::size_t idx = 0; idx < out.size(); ++idx)
    t.add({s.magnet, fmt(s.gaps[idx / s.powers.size()]), fmt(s.powers[idx % s.powers.size()]),
           fmt(out[idx].F_th), fmt(out[idx].F_GL), fmt(out[idx].delta_F)});
  RunOutput r;
  r.tables["sweep_force.csv"] = std::move(t);
  return r;
}

/// Writes tables, plot script and a manifest into `dir`.
inline void write_outputs(const RunOutput& out, const std::filesystem::path& dir,
                          const std::string& command, const Config& cfg, std::uint64_t seed,
                          const std::string& plot_name) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, table] : out.tables) {
    table.write(dir / name);
    files.push_back(name);
  }
  if (!out.plot_script.empty()) {
    std::ofstream(dir / plot_name) << out.plot_script;
    files.push_back(plot_name);
  }
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = cfg.hash;
  manifest["seed"] = seed;
  manifest["version"] = version_string;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["fftw_version"] = std::string(fftw_version);
  manifest["outputs"] = files;
  manifest["config"] = cfg.source;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

} // namespace spinforce

#endif // SPINFORCE_SCENARIOS_HPP
