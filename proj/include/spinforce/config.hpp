#ifndef SPINFORCE_CONFIG_HPP
#define SPINFORCE_CONFIG_HPP

// Scenario configuration: one JSON document with named presets (magnets,
// diamonds, rate tables, oscillators) and scenario blocks that reference them.

#include "force_model.hpp"
#include "magnetostatics.hpp"
#include "mechanics.hpp"
#include "nv_spin.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace spinforce {

class ConfigError : public error {
public:
  ConfigError(const std::string& key_path, const std::string& what)
      : error(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const noexcept { return key_path_; }

private:
  std::string key_path_;
};

struct Presets {
  std::map<std::string, CylindricalMagnet> magnets;
  std::map<std::string, DiamondSpec> diamonds;
  std::map<std::string, SevenLevelParams> rates;
  std::map<std::string, OscillatorParams> oscillators;
};

struct Scenario {
  std::string name;
  std::string magnet = "small";
  std::vector<std::string> magnets{"small", "large"};
  double gap = 0.5e-3;                 // m
  std::vector<double> gaps;            // m
  std::string diamond = "dnvb14";
  std::string rates = "seven_level";
  std::string oscillator = "levitated_graphite";
  double spot_diameter = 1e-3;         // m
  SpotProfile spot_profile = SpotProfile::uniform;
  std::vector<double> powers{50.0};    // mW
  std::vector<double> duties{0.48};
  std::vector<double> intensities{0.0, 10.0, 30.0, 50.0}; // mW/mm^2
  double field = 0.63;                 // T
  double gradient = -98.0;             // T/m
  int theta_points = 91;
  double temperature = 300.0;          // K
  double scaling_factor = 1.2;
  double duration = 1200.0;            // s
  double sample_rate = 2440.0;         // Hz
  double segment_length = 100.0;       // s
  double band_halfwidth = 0.0;         // Hz; 0 = five resolution bandwidths
  std::string window = "hann";
  double rise_time = 0.0;              // s
  bool thermal_noise = true;
  std::uint64_t seed = 1;
  std::string outputs;                 // directory
};

struct Config {
  Presets presets;
  std::map<std::string, Scenario> scenarios;
  nlohmann::json source;
  std::string hash;

  const Scenario& scenario(const std::string& name) const {
    const auto it = scenarios.find(name);
    if (it == scenarios.end())
      throw ConfigError("scenarios." + name, "scenario not defined");
    return it->second;
  }
  const CylindricalMagnet& magnet(const std::string& name, const std::string& at) const {
    const auto it = presets.magnets.find(name);
    if (it == presets.magnets.end())
      throw ConfigError(at, "unknown magnet preset '" + name + "'");
    return it->second;
  }
};

/// 64-bit FNV-1a of a byte string, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Built-in configuration; config/default.json ships the same document.
inline const char* default_config_text() {
  return R"json({
  "magnets": {
    "small": { "radius": 7.4365883060269651e-3, "length": 20e-3, "remanence": 1.5567676099696133 },
    "large": { "radius": 1.48731766120539302e-2, "length": 20e-3, "remanence": 1.5567676099696133 }
  },
  "diamonds": {
    "dnvb14": { "thickness": 0.5e-3, "width": 3e-3, "height": 3e-3,
                "nv_density_ppm": 4.5, "carbon_number_density": 1.76e29 }
  },
  "rates": {
    "seven_level": { "k_pump_per_intensity": 16.0, "k_rad": 65e6, "k_isc_ms0": 11e6,
                     "k_isc_ms1": 80e6, "k_s0": 3.0e6, "k_s1": 2.6e6, "D_es": 1.42e9,
                     "T1": 5e-3, "excited_state_hamiltonian": true }
  },
  "oscillators": {
    "levitated_graphite": { "mass": 1.28e-4, "f0": 17.6, "Q": 55, "temperature": 300 }
  },
  "scenarios": {
    "fig1c": { "intensities": [0, 10, 30, 50], "field": 0.63, "gradient": -98.0,
               "theta_points": 91, "outputs": "fig1c" },
    "fig2":  { "magnet": "small", "gap": 0.5e-3, "powers": [50, 10], "duties": [0.48, 0.5],
               "duration": 1200, "seed": 2024, "outputs": "fig2" },
    "fig3":  { "magnet": "small", "gap": 0.5e-3, "powers": [0, 5, 10, 20, 30, 40, 50],
               "duties": [0.2, 0.48, 0.5, 0.8], "duration": 1200, "seed": 3, "outputs": "fig3" },
    "fig4":  { "magnets": ["small", "large"], "powers": [50], "duties": [0.48],
               "gaps": [0.5e-3, 1.5e-3, 2.5e-3, 3.5e-3, 4.5e-3, 5.5e-3, 6.5e-3], "outputs": "fig4" },
    "sweep": { "magnet": "small", "powers": [0, 10, 20, 30, 40, 50],
               "gaps": [0.5e-3, 1.5e-3, 2.5e-3, 3.5e-3], "outputs": "sweep" }
  }
})json";
}

namespace detail {

using nlohmann::json;

template <class T>
T get_or(const json& obj, const std::string& key, const std::string& at, T fallback) {
  if (!obj.contains(key))
    return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(at + "." + key, std::string("wrong type (") + e.what() + ")");
  }
}

inline const json& object_at(const json& parent, const std::string& key, const std::string& at) {
  if (!parent.contains(key))
    throw ConfigError(at.empty() ? key : at + "." + key, "missing section");
  const json& j = parent.at(key);
  if (!j.is_object())
    throw ConfigError(at.empty() ? key : at + "." + key, "expected an object");
  return j;
}

inline void require_positive(double v, const std::string& at) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(at, "must be > 0");
}

template <class T>
void require_nonempty(const std::vector<T>& v, const std::string& at) {
  if (v.empty())
    throw ConfigError(at, "list must not be empty");
}

inline void check_keys(const json& obj, const std::string& at,
                       std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ConfigError(at + "." + key, "unknown key");
  }
}

inline Scenario parse_scenario(const std::string& name, const json& j, const Presets& presets) {
  const std::string at = "scenarios." + name;
  check_keys(j, at,
             {"magnet", "magnets", "gap", "gaps", "diamond", "rates", "oscillator", "spot",
              "powers", "duties", "intensities", "field", "gradient", "theta_points",
              "temperature", "scaling_factor", "duration", "sample_rate", "segment_length",
              "band_halfwidth", "window", "rise_time", "thermal_noise", "seed", "outputs"});
  Scenario s;
  s.name = name;
  s.outputs = name;
  s.magnet = get_or(j, "magnet", at, s.magnet);
  s.magnets = get_or(j, "magnets", at, s.magnets);
  s.gap = get_or(j, "gap", at, s.gap);
  s.gaps = get_or(j, "gaps", at, std::vector<double>{s.gap});
  s.diamond = get_or(j, "diamond", at, s.diamond);
  s.rates = get_or(j, "rates", at, s.rates);
  s.oscillator = get_or(j, "oscillator", at, s.oscillator);
  if (j.contains("spot")) {
    const json& spot = j.at("spot");
    check_keys(spot, at + ".spot", {"diameter", "profile"});
    s.spot_diameter = get_or(spot, "diameter", at + ".spot", s.spot_diameter);
    const auto profile = get_or<std::string>(spot, "profile", at + ".spot", "uniform");
    if (profile == "uniform")
      s.spot_profile = SpotProfile::uniform;
    else if (profile == "gaussian")
      s.spot_profile = SpotProfile::gaussian;
    else
      throw ConfigError(at + ".spot.profile", "expected 'uniform' or 'gaussian'");
  }
  s.powers = get_or(j, "powers", at, s.powers);
  s.duties = get_or(j, "duties", at, s.duties);
  s.intensities = get_or(j, "intensities", at, s.intensities);
  s.field = get_or(j, "field", at, s.field);
  s.gradient = get_or(j, "gradient", at, s.gradient);
  s.theta_points = get_or(j, "theta_points", at, s.theta_points);
  s.temperature = get_or(j, "temperature", at, s.temperature);
  s.scaling_factor = get_or(j, "scaling_factor", at, s.scaling_factor);
  s.duration = get_or(j, "duration", at, s.duration);
  s.sample_rate = get_or(j, "sample_rate", at, s.sample_rate);
  s.segment_length = get_or(j, "segment_length", at, s.segment_length);
  s.band_halfwidth = get_or(j, "band_halfwidth", at, s.band_halfwidth);
  s.window = get_or(j, "window", at, s.window);
  s.rise_time = get_or(j, "rise_time", at, s.rise_time);
  s.thermal_noise = get_or(j, "thermal_noise", at, s.thermal_noise);
  s.seed = get_or(j, "seed", at, s.seed);
  s.outputs = get_or(j, "outputs", at, s.outputs);

  if (!presets.magnets.count(s.magnet))
    throw ConfigError(at + ".magnet", "unknown magnet preset '" + s.magnet + "'");
  require_nonempty(s.magnets, at + ".magnets");
  for (std::size_t i = 0; i < s.magnets.size(); ++i)
    if (!presets.magnets.count(s.magnets[i]))
      throw ConfigError(at + ".magnets[" + std::to_string(i) + "]",
                        "unknown magnet preset '" + s.magnets[i] + "'");
  if (!presets.diamonds.count(s.diamond))
    throw ConfigError(at + ".diamond", "unknown diamond preset '" + s.diamond + "'");
  if (!presets.rates.count(s.rates))
    throw ConfigError(at + ".rates", "unknown rates preset '" + s.rates + "'");
  if (!presets.oscillators.count(s.oscillator))
    throw ConfigError(at + ".oscillator", "unknown oscillator preset '" + s.oscillator + "'");
  require_positive(s.gap, at + ".gap");
  require_nonempty(s.gaps, at + ".gaps");
  for (std::size_t i = 0; i < s.gaps.size(); ++i)
    require_positive(s.gaps[i], at + ".gaps[" + std::to_string(i) + "]");
  require_nonempty(s.powers, at + ".powers");
  for (std::size_t i = 0; i < s.powers.size(); ++i)
    if (!(s.powers[i] >= 0.0))
      throw ConfigError(at + ".powers[" + std::to_string(i) + "]", "must be >= 0");
  require_nonempty(s.duties, at + ".duties");
  for (std::size_t i = 0; i < s.duties.size(); ++i)
    if (!(s.duties[i] > 0.0 && s.duties[i] < 1.0))
      throw ConfigError(at + ".duties[" + std::to_string(i) + "]", "must lie in (0, 1)");
  require_nonempty(s.intensities, at + ".intensities");
  for (std::size_t i = 0; i < s.intensities.size(); ++i)
    if (!(s.intensities[i] >= 0.0))
      throw ConfigError(at + ".intensities[" + std::to_string(i) + "]", "must be >= 0");
  if (s.theta_points < 2)
    throw ConfigError(at + ".theta_points", "must be >= 2");
  require_positive(s.spot_diameter, at + ".spot.diameter");
  require_positive(s.temperature, at + ".temperature");
  require_positive(s.scaling_factor, at + ".scaling_factor");
  require_positive(s.duration, at + ".duration");
  require_positive(s.sample_rate, at + ".sample_rate");
  require_positive(s.segment_length, at + ".segment_length");
  if (!(s.band_halfwidth >= 0.0))
    throw ConfigError(at + ".band_halfwidth", "must be >= 0");
  if (s.window != "hann" && s.window != "rectangular")
    throw ConfigError(at + ".window", "expected 'hann' or 'rectangular'");
  if (s.outputs.empty())
    throw ConfigError(at + ".outputs", "must not be empty");
  return s;
}

} // namespace detail

inline Config parse_config(const nlohmann::json& j) {
  using detail::get_or;
  if (!j.is_object())
    throw ConfigError("<root>", "expected a JSON object");
  detail::check_keys(j, "<root>", {"magnets", "diamonds", "rates", "oscillators", "scenarios"});
  Config cfg;
  cfg.source = j;
  cfg.hash = fnv1a_hex(j.dump());

  for (const auto& [name, m] : detail::object_at(j, "magnets", "").items()) {
    const std::string at = "magnets." + name;
    detail::check_keys(m, at, {"radius", "length", "remanence", "pole_face_z"});
    CylindricalMagnet mag;
    mag.radius = get_or(m, "radius", at, 0.0);
    mag.length = get_or(m, "length", at, 0.0);
    mag.remanence = get_or(m, "remanence", at, 0.0);
    mag.pole_face_center.z() = get_or(m, "pole_face_z", at, 0.0);
    detail::require_positive(mag.radius, at + ".radius");
    detail::require_positive(mag.length, at + ".length");
    detail::require_positive(mag.remanence, at + ".remanence");
    cfg.presets.magnets[name] = mag;
  }
  for (const auto& [name, d] : detail::object_at(j, "diamonds", "").items()) {
    const std::string at = "diamonds." + name;
    detail::check_keys(d, at, {"thickness", "width", "height", "nv_density_ppm",
                               "carbon_number_density"});
    DiamondSpec ds;
    ds.thickness = get_or(d, "thickness", at, ds.thickness);
    ds.width = get_or(d, "width", at, ds.width);
    ds.height = get_or(d, "height", at, ds.height);
    ds.nv_density_ppm = get_or(d, "nv_density_ppm", at, ds.nv_density_ppm);
    ds.carbon_number_density = get_or(d, "carbon_number_density", at, ds.carbon_number_density);
    detail::require_positive(ds.thickness, at + ".thickness");
    detail::require_positive(ds.width, at + ".width");
    detail::require_positive(ds.height, at + ".height");
    detail::require_positive(ds.nv_density_ppm, at + ".nv_density_ppm");
    detail::require_positive(ds.carbon_number_density, at + ".carbon_number_density");
    cfg.presets.diamonds[name] = ds;
  }
  for (const auto& [name, r] : detail::object_at(j, "rates", "").items()) {
    const std::string at = "rates." + name;
    detail::check_keys(r, at, {"k_pump_per_intensity", "k_rad", "k_isc_ms0", "k_isc_ms1", "k_s0",
                               "k_s1", "D_es", "T1", "excited_state_hamiltonian"});
    SevenLevelParams p;
    p.k_pump_per_intensity = get_or(r, "k_pump_per_intensity", at, p.k_pump_per_intensity);
    p.k_rad = get_or(r, "k_rad", at, p.k_rad);
    p.k_isc_ms0 = get_or(r, "k_isc_ms0", at, p.k_isc_ms0);
    p.k_isc_ms1 = get_or(r, "k_isc_ms1", at, p.k_isc_ms1);
    p.k_s0 = get_or(r, "k_s0", at, p.k_s0);
    p.k_s1 = get_or(r, "k_s1", at, p.k_s1);
    p.D_es = get_or(r, "D_es", at, p.D_es);
    p.T1 = get_or(r, "T1", at, p.T1);
    p.excited_state_hamiltonian =
        get_or(r, "excited_state_hamiltonian", at, p.excited_state_hamiltonian);
    try {
      p.validate();
    } catch (const error& e) {
      throw ConfigError(at, e.what());
    }
    cfg.presets.rates[name] = p;
  }
  for (const auto& [name, o] : detail::object_at(j, "oscillators", "").items()) {
    const std::string at = "oscillators." + name;
    detail::check_keys(o, at, {"mass", "f0", "Q", "temperature"});
    OscillatorParams op;
    op.mass = get_or(o, "mass", at, op.mass);
    op.f0 = get_or(o, "f0", at, op.f0);
    op.Q = get_or(o, "Q", at, op.Q);
    op.temperature = get_or(o, "temperature", at, op.temperature);
    detail::require_positive(op.mass, at + ".mass");
    detail::require_positive(op.f0, at + ".f0");
    detail::require_positive(op.Q, at + ".Q");
    detail::require_positive(op.temperature, at + ".temperature");
    cfg.presets.oscillators[name] = op;
  }
  if (j.contains("scenarios")) {
    for (const auto& [name, s] : detail::object_at(j, "scenarios", "").items()) {
      if (!s.is_object())
        throw ConfigError("scenarios." + name, "expected an object");
      cfg.scenarios[name] = detail::parse_scenario(name, s, cfg.presets);
    }
  }
  return cfg;
}

inline Config default_config() {
  return parse_config(nlohmann::json::parse(default_config_text()));
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path.string(), "cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

} // namespace spinforce

#endif // SPINFORCE_CONFIG_HPP
