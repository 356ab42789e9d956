#ifndef SPINFORCE_FORCE_MODEL_HPP
#define SPINFORCE_FORCE_MODEL_HPP

// Stern-Gerlach force per NV, averaged over the four <111> orientations and
// integrated over the illuminated part of the diamond.

#include "core.hpp"
#include "magnetostatics.hpp"
#include "nv_spin.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace spinforce {

/// f_i = sum_j m_j d_i B_j.
inline Vec3 per_spin_force(const Vec3& moment, const Mat3& grad_b) {
  return grad_b * moment;
}

/// Everything the spin model needs besides the field.
struct SpinEnvironment {
  SevenLevelParams rates;
  double temperature = 300.0; // K
  PhysicalConstants constants = default_constants;
  std::array<NVOrientation, 4> orientations = default_orientations();
};

/// Per-spin moment (J/T) of one orientation in the steady state of `drive`.
inline Vec3 spin_moment(const Vec3& b_lab, const NVOrientation& orient, const LaserDrive& drive,
                        const SpinEnvironment& env) {
  const auto h = build_hamiltonian(b_lab, orient, env.constants);
  const auto ss = seven_level_steady_state(h, drive, env.rates, env.temperature, env.constants);
  return lab_moment(ss.spin_basis, orient, env.constants);
}

/// Per-spin moment averaged over the orientations of `env`.
inline Vec3 mean_moment(const Vec3& b_lab, const LaserDrive& drive, const SpinEnvironment& env) {
  Vec3 m = Vec3::Zero();
  for (const auto& o : env.orientations)
    m += spin_moment(b_lab, o, drive, env);
  return m / double(env.orientations.size());
}

inline Vec3 orientation_averaged_force(const Vec3& point, const LaserDrive& drive,
                                       const CylindricalMagnet& magnet,
                                       const SpinEnvironment& env) {
  const FieldSample s = sample_at(magnet, point);
  return per_spin_force(mean_moment(s.B, drive, env), s.gradB);
}

//
// Diamond and illumination geometry. The slab stands with its 0.5 mm
// thickness along lab x, 3 mm width along y and 3 mm height along z. The
// beam travels along y; the illuminated volume is the spot disk (in the x-z
// plane) extruded along the beam through the full width and clipped to the
// slab. Attenuation is ignored.
//

struct DiamondSpec {
  double thickness = 0.5e-3; // m, along x
  double width = 3e-3;       // m, along y (beam axis)
  double height = 3e-3;      // m, along z
  Vec3 bottom_center = Vec3(0.0, 0.0, 0.5e-3);
  double nv_density_ppm = 4.5;
  double carbon_number_density = 1.76e29; // m^-3

  double nv_number_density() const { return nv_density_ppm * 1e-6 * carbon_number_density; }
  double bottom() const { return bottom_center.z(); }
  double top() const { return bottom_center.z() + height; }

  void validate() const {
    if (!(thickness > 0.0 && width > 0.0 && height > 0.0))
      throw GeometryError("DiamondSpec: dimensions must be > 0");
    if (!(nv_number_density() > 0.0))
      throw GeometryError("DiamondSpec: NV number density must be > 0");
  }
};

/// Slab whose bottom face sits `gap` above the magnet's pole face, centred on
/// the magnet axis.
inline DiamondSpec place_above(const CylindricalMagnet& magnet, double gap, DiamondSpec d = {}) {
  d.bottom_center = magnet.pole_face_center + gap * magnet.axis;
  return d;
}

enum class SpotProfile { uniform, gaussian };

struct IlluminationSpot {
  Vec3 center = Vec3(0.0, 0.0, 1e-3);
  double diameter = 1e-3; // m; 1/e^2 diameter for the Gaussian profile
  SpotProfile profile = SpotProfile::uniform;
  double power = 0.0; // mW

  double radius() const { return 0.5 * diameter; }

  /// Intensity at the spot centre (mW/mm^2).
  double peak_intensity() const {
    const double r_mm = radius() * 1e3;
    const double area = pi * r_mm * r_mm;
    return profile == SpotProfile::uniform ? power / area : 2.0 * power / area;
  }
};

/// Spot touching the bottom edge of the slab's face, on its centreline.
inline IlluminationSpot default_spot(const DiamondSpec& d, double power_mw,
                                     double diameter = 1e-3) {
  IlluminationSpot s;
  s.diameter = diameter;
  s.power = power_mw;
  s.center = d.bottom_center + Vec3(0.0, 0.0, 0.5 * diameter);
  return s;
}

inline void validate_spot(const IlluminationSpot& s, const DiamondSpec& d) {
  if (!(s.diameter > 0.0) || !(s.power >= 0.0))
    throw GeometryError("IlluminationSpot: diameter must be > 0 and power >= 0");
  const double r = s.radius();
  const double tol = 1e-12;
  if (s.center.z() - r < d.bottom() - tol || s.center.z() + r > d.top() + tol ||
      std::abs(s.center.x() - d.bottom_center.x()) > 0.5 * d.thickness + tol)
    throw GeometryError("IlluminationSpot: spot does not lie within the diamond face");
}

struct QuadratureGrid {
  int n_beam = 21;      // along the beam (y)
  int n_height = 21;    // across the chord of the spot disk (z)
  int n_thickness = 11; // across the slab (x)
};

struct VolumeCell {
  Vec3 position;
  double volume;
};

/// Midpoint cells over {(x - cx)^2 + (z - cz)^2 <= r^2} intersected with the
/// slab. The z extent of each x column is the exact disk chord, so the cells
/// tile the illuminated region without staircase error in the cross-section.
inline std::vector<VolumeCell> illuminated_cells(const DiamondSpec& d, const IlluminationSpot& s,
                                                 const QuadratureGrid& g) {
  const double r = s.radius();
  const double x0 = std::max(d.bottom_center.x() - 0.5 * d.thickness, s.center.x() - r);
  const double x1 = std::min(d.bottom_center.x() + 0.5 * d.thickness, s.center.x() + r);
  const double y0 = d.bottom_center.y() - 0.5 * d.width;
  const double dx = (x1 - x0) / g.n_thickness;
  const double dy = d.width / g.n_beam;
  std::vector<VolumeCell> cells;
  cells.reserve(static_cast<std::size_t>(g.n_beam) * g.n_height * g.n_thickness);
  for (int ix = 0; ix < g.n_thickness; ++ix) {
    const double x = x0 + (ix + 0.5) * dx;
    const double half = std::sqrt(std::max(0.0, r * r - (x - s.center.x()) * (x - s.center.x())));
    const double z0 = std::max(d.bottom(), s.center.z() - half);
    const double z1 = std::min(d.top(), s.center.z() + half);
    if (!(z1 > z0))
      continue;
    const double dz = (z1 - z0) / g.n_height;
    for (int iz = 0; iz < g.n_height; ++iz)
      for (int iy = 0; iy < g.n_beam; ++iy)
        cells.push_back({Vec3(x, y0 + (iy + 0.5) * dy, z0 + (iz + 0.5) * dz), dx * dy * dz});
  }
  return cells;
}

struct ForceResult {
  double F_th = 0.0;    // N, z, thermal spins
  double F_GL = 0.0;    // N, z, optically pumped spins
  double delta_F = 0.0; // N, |F_GL - F_th| / scaling_factor
  double scaling_factor = 1.2;
  Vec3 F_th_vector = Vec3::Zero();
  Vec3 F_GL_vector = Vec3::Zero();
  double illuminated_volume = 0.0; // m^3
  double intensity = 0.0;          // mW/mm^2 at the spot centre
};

struct EnsembleOptions {
  double scaling_factor = 1.2;
  QuadratureGrid grid;
  unsigned threads = 1;
};

/// Net spin force on the slab. Thermal spins use their local moment; the
/// optically pumped moment is the one at the spot centre, held uniform over
/// the illuminated volume. With no effective pumping F_GL equals F_th.
inline ForceResult ensemble_force(const DiamondSpec& diamond, const IlluminationSpot& spot,
                                  const CylindricalMagnet& magnet, bool polarizing,
                                  const SpinEnvironment& env, const EnsembleOptions& opt = {}) {
  diamond.validate();
  magnet.validate();
  validate_spot(spot, diamond);
  if (!(opt.scaling_factor > 0.0))
    throw domain_error("ensemble_force: scaling factor must be > 0");

  const Vec3 c = diamond.bottom_center;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (double z : {diamond.bottom(), diamond.top()}) {
        const Vec3 corner(c.x() + 0.5 * sx * diamond.thickness, c.y() + 0.5 * sy * diamond.width, z);
        if (magnet.contains(corner) || (corner - magnet.pole_face_center).dot(magnet.axis) <= 0.0)
          throw GeometryError("ensemble_force: diamond intersects or sits below the magnet face");
      }

  const LaserDrive drive{spot.peak_intensity(), polarizing};
  const bool pumped = polarizing && drive.intensity > 0.0;
  std::array<Vec3, 4> optical{};
  if (pumped) {
    const Vec3 b_center = field_at(magnet, spot.center);
    for (std::size_t k = 0; k < env.orientations.size(); ++k)
      optical[k] = spin_moment(b_center, env.orientations[k], drive, env);
  }
  Vec3 m_optical = Vec3::Zero();
  for (const auto& m : optical)
    m_optical += m;
  m_optical /= double(env.orientations.size());

  const auto cells = illuminated_cells(diamond, spot, opt.grid);
  std::vector<Vec3> f_th(cells.size()), f_gl(cells.size());
  const LaserDrive dark{0.0, true};
  parallel_for(cells.size(), opt.threads, [&](std::size_t i) {
    const FieldSample s = sample_at(magnet, cells[i].position);
    f_th[i] = per_spin_force(mean_moment(s.B, dark, env), s.gradB);
    f_gl[i] = per_spin_force(m_optical, s.gradB);
  });

  ForceResult r;
  r.scaling_factor = opt.scaling_factor;
  r.intensity = drive.intensity;
  const double n = diamond.nv_number_density();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    r.F_th_vector += f_th[i] * cells[i].volume;
    r.F_GL_vector += f_gl[i] * cells[i].volume;
    r.illuminated_volume += cells[i].volume;
  }
  r.F_th_vector *= n;
  r.F_GL_vector *= n;
  if (!pumped)
    r.F_GL_vector = r.F_th_vector;
  r.F_th = r.F_th_vector.z();
  r.F_GL = r.F_GL_vector.z();
  r.delta_F = std::abs(r.F_GL - r.F_th) / opt.scaling_factor;
  return r;
}

} // namespace spinforce

#endif // SPINFORCE_FORCE_MODEL_HPP
