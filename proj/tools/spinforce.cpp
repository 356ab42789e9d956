// spinforce command line: single-point evaluations and figure scenarios.
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure.

#include <spinforce/spinforce.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
namespace sf = spinforce;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  unsigned thread_count() const {
    return threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  }
};

sf::Config load(const Globals& g) {
  return g.config_path.empty() ? sf::default_config() : sf::load_config(g.config_path);
}

void write_manifest(const fs::path& dir, const std::string& command, const sf::Config& cfg,
                    std::uint64_t seed, const json& params, const json& outputs) {
  json m;
  m["command"] = command;
  m["config_hash"] = cfg.hash;
  m["seed"] = seed;
  m["version"] = sf::version_string;
  m["parameters"] = params;
  m["outputs"] = outputs;
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

sf::Scenario scenario_for(const sf::Config& cfg, const std::string& name, const Globals& g) {
  sf::Scenario s = cfg.scenario(name);
  if (g.seed)
    s.seed = *g.seed;
  return s;
}

fs::path scenario_dir(const Globals& g, const sf::Scenario& s) { return fs::path(g.out_dir) / s.outputs; }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-force model and levitated-oscillator analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration (built-in defaults if omitted)");
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "override the random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");

  std::function<void()> action;

  // field
  auto* field = app.add_subcommand("field", "magnet field map on a grid");
  std::string field_magnet = "small";
  std::vector<double> lo{-2e-3, 0.0, 0.5e-3}, hi{2e-3, 0.0, 6.5e-3};
  std::vector<int> npts{9, 1, 13};
  field->add_option("--magnet", field_magnet)->capture_default_str();
  field->add_option("--lo", lo, "x y z (m)")->expected(3);
  field->add_option("--hi", hi, "x y z (m)")->expected(3);
  field->add_option("--n", npts, "nx ny nz")->expected(3);
  field->callback([&] {
    action = [&] {
      const sf::Config cfg = load(g);
      const auto& mag = cfg.magnet(field_magnet, "--magnet");
      sf::GridSpec grid{sf::Vec3(lo[0], lo[1], lo[2]), sf::Vec3(hi[0], hi[1], hi[2]),
                        {npts[0], npts[1], npts[2]}};
      const auto samples = sf::field_map(mag, grid, g.thread_count());
      fs::create_directories(g.out_dir);
      sf::export_field_map(samples, fs::path(g.out_dir) / "field_map.csv");
      write_manifest(g.out_dir, "field", cfg, 0,
                     {{"magnet", field_magnet}, {"lo", lo}, {"hi", hi}, {"n", npts}},
                     {"field_map.csv"});
    };
  });

  // spin
  auto* spin = app.add_subcommand("spin", "steady-state spin populations and moment");
  double spin_b = 0.63, spin_theta = 0.0, spin_intensity = 50.0, spin_temperature = 300.0;
  bool spin_ir = false;
  std::string spin_rates = "seven_level";
  spin->add_option("--field", spin_b, "|B| (T)")->capture_default_str();
  spin->add_option("--theta", spin_theta, "angle between NV axis and B (deg)")->capture_default_str();
  spin->add_option("--intensity", spin_intensity, "mW/mm^2")->capture_default_str();
  spin->add_option("--temperature", spin_temperature, "K")->capture_default_str();
  spin->add_option("--rates", spin_rates)->capture_default_str();
  spin->add_flag("--non-polarizing", spin_ir, "laser does not pump the spin");
  spin->callback([&] {
    action = [&] {
      const sf::Config cfg = load(g);
      const auto it = cfg.presets.rates.find(spin_rates);
      if (it == cfg.presets.rates.end())
        throw sf::ConfigError("--rates", "unknown rates preset '" + spin_rates + "'");
      const sf::NVOrientation o{spin_theta * sf::pi / 180.0, 0.0, 1};
      const sf::Vec3 b(0.0, 0.0, spin_b);
      const auto h = sf::build_hamiltonian(b, o);
      const auto ss = sf::seven_level_steady_state(h, sf::LaserDrive{spin_intensity, !spin_ir},
                                                   it->second, spin_temperature);
      const auto th = sf::thermal_state(h, spin_temperature);
      const sf::Vec3 m = sf::lab_moment(ss.spin_basis, o);
      const sf::Vec3 m_th = sf::lab_moment(th, o);
      json out;
      out["populations_ms"] = {ss.spin_basis.population(0), ss.spin_basis.population(1),
                               ss.spin_basis.population(2)};
      out["thermal_populations_ms"] = {th.population(0), th.population(1), th.population(2)};
      out["moment_J_per_T"] = {m.x(), m.y(), m.z()};
      out["thermal_moment_J_per_T"] = {m_th.x(), m_th.y(), m_th.z()};
      fs::create_directories(g.out_dir);
      std::ofstream(fs::path(g.out_dir) / "spin.json") << out.dump(2) << '\n';
      std::cout << out.dump(2) << '\n';
      write_manifest(g.out_dir, "spin", cfg, 0,
                     {{"field", spin_b}, {"theta_deg", spin_theta}, {"intensity", spin_intensity},
                      {"temperature", spin_temperature}, {"rates", spin_rates},
                      {"polarizing", !spin_ir}},
                     {"spin.json"});
    };
  });

  // force
  auto* force = app.add_subcommand("force", "ensemble force for one magnet, gap and power");
  std::string force_scenario = "fig3";
  std::optional<std::string> force_magnet;
  std::optional<double> force_gap, force_power;
  force->add_option("--scenario", force_scenario, "scenario supplying defaults")->capture_default_str();
  force->add_option("--magnet", force_magnet);
  force->add_option("--gap", force_gap, "m");
  force->add_option("--power", force_power, "mW");
  force->callback([&] {
    action = [&] {
      const sf::Config cfg = load(g);
      const sf::Scenario s = scenario_for(cfg, force_scenario, g);
      const std::string mag = force_magnet.value_or(s.magnet);
      cfg.magnet(mag, "--magnet");
      const double gap = force_gap.value_or(s.gap);
      const double power = force_power.value_or(s.powers.back());
      const auto f = sf::scenario_force(cfg, s, mag, gap, power);
      json out{{"magnet", mag},        {"gap_m", gap},       {"power_mW", power},
               {"intensity", f.intensity}, {"F_th_N", f.F_th}, {"F_GL_N", f.F_GL},
               {"delta_F_N", f.delta_F}, {"scaling_factor", f.scaling_factor},
               {"illuminated_volume_m3", f.illuminated_volume}};
      fs::create_directories(g.out_dir);
      std::ofstream(fs::path(g.out_dir) / "force.json") << out.dump(2) << '\n';
      std::cout << out.dump(2) << '\n';
      write_manifest(g.out_dir, "force", cfg, 0,
                     {{"scenario", force_scenario}, {"magnet", mag}, {"gap", gap}, {"power", power}},
                     {"force.json"});
    };
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "oscillator time series under a square drive");
  std::string sim_osc = "levitated_graphite";
  double sim_df = 5e-9, sim_flow = 0.0, sim_duty = 0.48, sim_duration = 1200.0, sim_rate = 2440.0;
  double sim_rise = 0.0;
  bool sim_quiet = false;
  sim->add_option("--oscillator", sim_osc)->capture_default_str();
  sim->add_option("--delta-f", sim_df, "force step (N)")->capture_default_str();
  sim->add_option("--f-low", sim_flow, "baseline force (N)")->capture_default_str();
  sim->add_option("--duty", sim_duty)->capture_default_str();
  sim->add_option("--duration", sim_duration, "s")->capture_default_str();
  sim->add_option("--sample-rate", sim_rate, "Hz")->capture_default_str();
  sim->add_option("--rise-time", sim_rise, "s")->capture_default_str();
  sim->add_flag("--no-noise", sim_quiet, "disable the thermal force");
  sim->callback([&] {
    action = [&] {
      const sf::Config cfg = load(g);
      const auto it = cfg.presets.oscillators.find(sim_osc);
      if (it == cfg.presets.oscillators.end())
        throw sf::ConfigError("--oscillator", "unknown oscillator preset '" + sim_osc + "'");
      const sf::OscillatorParams& osc = it->second;
      sf::DriveWaveform d;
      d.F_low = sim_flow;
      d.F_high = sim_flow + sim_df;
      d.duty = sim_duty;
      d.period = 1.0 / osc.f0;
      d.rise_time = sim_rise;
      sf::SimulationOptions so;
      so.sample_rate = sim_rate;
      so.thermal_noise = !sim_quiet;
      so.seed = g.seed.value_or(1);
      const auto ts = sf::simulate(osc, d, sim_duration, so);
      fs::create_directories(g.out_dir);
      const json params{{"oscillator", sim_osc}, {"mass", osc.mass}, {"f0", osc.f0},
                        {"Q", osc.Q},            {"temperature", osc.temperature},
                        {"delta_F", sim_df},     {"F_low", sim_flow},
                        {"duty", sim_duty},      {"duration", sim_duration},
                        {"rise_time", sim_rise}, {"thermal_noise", !sim_quiet}};
      sf::export_timeseries(ts, fs::path(g.out_dir) / "timeseries.csv", params);
      write_manifest(g.out_dir, "simulate", cfg, so.seed, params,
                     {"timeseries.csv", "timeseries.csv.meta.json"});
    };
  });

  // analyze
  auto* ana = app.add_subcommand("analyze", "PSD, peak amplitude and force from a time series");
  std::string ana_input, ana_window = "hann";
  double ana_seg = 100.0, ana_band = 0.0, ana_duty = 0.48, ana_rate = 0.0;
  sf::OscillatorParams ana_osc;
  ana->add_option("input", ana_input, "two-column t,z CSV")->required();
  ana->add_option("--segment-length", ana_seg, "s")->capture_default_str();
  ana->add_option("--band-halfwidth", ana_band, "Hz (0 = five resolution bandwidths)")
      ->capture_default_str();
  ana->add_option("--window", ana_window, "hann or rectangular")->capture_default_str();
  ana->add_option("--duty", ana_duty)->capture_default_str();
  ana->add_option("--mass", ana_osc.mass, "kg")->capture_default_str();
  ana->add_option("--f0", ana_osc.f0, "Hz")->capture_default_str();
  ana->add_option("--q", ana_osc.Q)->capture_default_str();
  ana->add_option("--sample-rate", ana_rate, "Hz (0 = sidecar or time column)");
  ana->callback([&] {
    action = [&] {
      const sf::Config cfg = load(g);
      sf::TimeSeriesFormat fmt;
      fmt.sample_rate = ana_rate;
      const auto ts = sf::import_timeseries(ana_input, fmt);
      const auto r = sf::recover_force(ts, ana_osc, ana_duty, ana_seg,
                                       sf::window_from_string(ana_window), ana_band);
      fs::create_directories(g.out_dir);
      sf::Table psd;
      psd.columns = {"f_Hz", "S_m2_per_Hz"};
      for (std::size_t k = 0; k < r.psd.frequencies.size(); ++k)
        psd.add({sf::fmt(r.psd.frequencies[k]), sf::fmt(r.psd.values[k])});
      psd.write(fs::path(g.out_dir) / "psd.csv");
      json out{{"amplitude_m", r.amplitude.amplitude},
               {"amplitude_raw_m", r.amplitude.amplitude_raw},
               {"band_Hz", {r.amplitude.band_lo, r.amplitude.band_hi}},
               {"background_m2_per_Hz", r.amplitude.background},
               {"resolution_bandwidth_Hz", r.psd.resolution_bandwidth},
               {"segments", r.psd.segments},
               {"delta_F_N", r.delta_F}};
      std::ofstream(fs::path(g.out_dir) / "analysis.json") << out.dump(2) << '\n';
      std::cout << out.dump(2) << '\n';
      write_manifest(g.out_dir, "analyze", cfg, ts.seed,
                     {{"input", ana_input}, {"segment_length", ana_seg}, {"band_halfwidth", ana_band},
                      {"window", ana_window}, {"duty", ana_duty}, {"mass", ana_osc.mass},
                      {"f0", ana_osc.f0}, {"Q", ana_osc.Q}},
                     {"psd.csv", "analysis.json"});
    };
  });

  // figure scenarios
  std::map<std::string, std::string> scenario_names;
  auto add_figure = [&](const std::string& name, const std::string& help, auto run) {
    auto* sub = app.add_subcommand(name, help);
    scenario_names[name] = name;
    sub->add_option("--scenario", scenario_names[name], "scenario block in the config")
        ->capture_default_str();
    sub->callback([&, name, run] {
      action = [&, name, run] {
        const sf::Config cfg = load(g);
        const sf::Scenario s = scenario_for(cfg, scenario_names[name], g);
        const sf::RunOutput out = run(cfg, s, g.thread_count());
        sf::write_outputs(out, scenario_dir(g, s), name, cfg, s.seed, "plot_" + name + ".py");
        std::cout << "wrote " << scenario_dir(g, s).string() << '\n';
      };
    });
  };
  add_figure("fig1c", "per-spin force versus NV angle",
             [](const sf::Config& c, const sf::Scenario& s, unsigned t) {
               return sf::run_fig1c(c, s, t).output;
             });
  add_figure("fig2", "driven trace, segment average and control PSDs",
             [](const sf::Config& c, const sf::Scenario& s, unsigned t) {
               return sf::run_fig2(c, s, t).output;
             });
  add_figure("fig3", "force versus laser power and duty",
             [](const sf::Config& c, const sf::Scenario& s, unsigned t) {
               return sf::run_fig3(c, s, t).output;
             });
  add_figure("fig4", "force versus gap for each magnet",
             [](const sf::Config& c, const sf::Scenario& s, unsigned t) {
               return sf::run_fig4(c, s, t).output;
             });
  add_figure("sweep", "model force over gap and power",
             [](const sf::Config& c, const sf::Scenario& s, unsigned t) {
               return sf::run_sweep(c, s, t);
             });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action();
  } catch (const sf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const sf::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const sf::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
