#ifndef SPINFORCE_MAGNETOSTATICS_HPP
#define SPINFORCE_MAGNETOSTATICS_HPP

// Field of a uniformly, axially magnetized cylinder.
//
// The exterior field uses the closed form in terms of Bulirsch's generalized
// complete elliptic integral
//
//   cel(kc, p, c, s) = int_0^{pi/2} (c cos^2 + s sin^2) /
//                      ((cos^2 + p sin^2) sqrt(cos^2 + kc^2 sin^2)) dphi
//
// In magnet-centred cylindrical coordinates (rho, z), with radius a,
// half-length b and B0 = Br / pi:
//
//   B_rho = B0 [a+ cel(k+, 1, 1, -1) - a- cel(k-, 1, 1, -1)]
//   B_z   = B0 a / (a + rho) [b+ cel(k+, g^2, 1, g) - b- cel(k-, g^2, 1, g)]
//
//   z+- = z +- b,  a+- = a / sqrt(z+-^2 + (rho + a)^2),
//   b+- = z+- / sqrt(z+-^2 + (rho + a)^2),  g = (a - rho) / (a + rho),
//   k+- = sqrt((z+-^2 + (a - rho)^2) / (z+-^2 + (rho + a)^2)).

#include "core.hpp"
#include "parallel.hpp"

#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace spinforce {

/// Bulirsch's cel by the Bartky/Bulirsch AGM-type recursion. Iterates until
/// the two AGM sequences agree to 1e-12 relative; convergence is quadratic so
/// the returned value is accurate to a few ulp.
inline double cel(double kc, double p, double c, double s) {
  if (kc == 0.0)
    return std::numeric_limits<double>::infinity();
  constexpr double tol = 1e-12;
  double k = std::abs(kc);
  double pp = p, cc = c, ss = s;
  double em = 1.0;
  if (p > 0.0) {
    pp = std::sqrt(p);
    ss = s / pp;
  } else {
    double f = kc * kc;
    double q = 1.0 - f;
    const double g = 1.0 - pp;
    f -= pp;
    q *= (ss - c * pp);
    pp = std::sqrt(f / g);
    cc = (c - ss) / g;
    ss = -q / (g * g * pp) + cc * pp;
  }
  double f = cc;
  cc += ss / pp;
  double g = k / pp;
  ss = 2.0 * (ss + f * g);
  pp += g;
  g = em;
  em += k;
  double kk = k;
  for (int it = 0; it < 64 && std::abs(g - k) > g * tol; ++it) {
    k = 2.0 * std::sqrt(kk);
    kk = k * em;
    f = cc;
    cc += ss / pp;
    g = kk / pp;
    ss = 2.0 * (ss + f * g);
    pp += g;
    g = em;
    em += k;
  }
  return 0.5 * pi * (ss + cc * em) / (em * (em + pp));
}

struct CylindricalMagnet {
  double radius = 0.0;    // m
  double length = 0.0;    // m
  double remanence = 0.0; // T, magnetization along +axis
  Vec3 pole_face_center = Vec3::Zero(); // centre of the face at the +axis end
  Vec3 axis = Vec3::UnitZ();

  void validate() const {
    if (!(radius > 0.0) || !(length > 0.0) || !(remanence > 0.0))
      throw GeometryError("CylindricalMagnet: radius, length and remanence must be > 0");
    if (!(std::abs(axis.norm() - 1.0) < 1e-9))
      throw GeometryError("CylindricalMagnet: axis must be a unit vector");
  }

  bool contains(const Vec3& p) const {
    const Vec3 d = p - pole_face_center;
    const double along = d.dot(axis);
    const double rho = (d - along * axis).norm();
    return rho <= radius && along <= 0.0 && along >= -length;
  }
};

class InsideMagnetAt : public InsideMagnet {
public:
  InsideMagnetAt(const std::string& what, std::ptrdiff_t index)
      : InsideMagnet(what), index_(index) {}
  std::ptrdiff_t index() const noexcept { return index_; }

private:
  std::ptrdiff_t index_;
};

struct FieldSample {
  Vec3 position = Vec3::Zero();
  Vec3 B = Vec3::Zero();     // T
  Mat3 gradB = Mat3::Zero(); // (i, j) = d_i B_j, T/m
};

namespace detail {

// (B_rho, B_z) in the magnet-centred frame.
inline std::array<double, 2> field_local(double a, double b, double br, double rho,
                                         double z) {
  const double b0 = br / pi;
  const double zp = z + b;
  const double zm = z - b;
  const double sp = std::sqrt(zp * zp + (rho + a) * (rho + a));
  const double sm = std::sqrt(zm * zm + (rho + a) * (rho + a));
  const double alpha_p = a / sp, alpha_m = a / sm;
  const double beta_p = zp / sp, beta_m = zm / sm;
  const double gamma = (a - rho) / (a + rho);
  const double kp = std::sqrt((zp * zp + (a - rho) * (a - rho)) / (sp * sp));
  const double km = std::sqrt((zm * zm + (a - rho) * (a - rho)) / (sm * sm));
  const double b_rho = b0 * (alpha_p * cel(kp, 1.0, 1.0, -1.0) -
                             alpha_m * cel(km, 1.0, 1.0, -1.0));
  const double b_z = b0 * a / (a + rho) *
                     (beta_p * cel(kp, gamma * gamma, 1.0, gamma) -
                      beta_m * cel(km, gamma * gamma, 1.0, gamma));
  return {b_rho, b_z};
}

inline Vec3 field_unchecked(const CylindricalMagnet& m, const Vec3& point) {
  const Vec3 d = point - m.pole_face_center;
  const double along = d.dot(m.axis);
  const Vec3 radial = d - along * m.axis;
  const double rho = radial.norm();
  const auto [b_rho, b_z] =
      field_local(m.radius, 0.5 * m.length, m.remanence, rho, along + 0.5 * m.length);
  Vec3 out = b_z * m.axis;
  if (rho > 0.0)
    out += b_rho * (radial / rho);
  return out;
}

} // namespace detail

/// B at a lab-frame point outside the magnet body. Throws InsideMagnet.
inline Vec3 field_at(const CylindricalMagnet& magnet, const Vec3& point) {
  if (magnet.contains(point))
    throw InsideMagnet("field_at: point lies inside the magnet");
  return detail::field_unchecked(magnet, point);
}

/// Stencil step for gradient_at (m).
inline constexpr double gradient_step = 1e-6;

/// Gradient tensor (i, j) = d_i B_j by 5-point central differences.
inline Mat3 gradient_at(const CylindricalMagnet& magnet, const Vec3& point) {
  constexpr double h = gradient_step;
  Mat3 g;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i) * h;
    const Vec3 d = -field_at(magnet, point + 2.0 * e) + 8.0 * field_at(magnet, point + e) -
                   8.0 * field_at(magnet, point - e) + field_at(magnet, point - 2.0 * e);
    g.row(i) = d.transpose() / (12.0 * h);
  }
  return g;
}

inline FieldSample sample_at(const CylindricalMagnet& magnet, const Vec3& point) {
  return {point, field_at(magnet, point), gradient_at(magnet, point)};
}

/// Closed-form on-axis B_z at height z above the pole face.
inline double on_axis_field(double radius, double length, double remanence, double z) {
  const double r2 = radius * radius;
  return 0.5 * remanence *
         ((z + length) / std::sqrt((z + length) * (z + length) + r2) -
          z / std::sqrt(z * z + r2));
}

/// d B_z / dz of on_axis_field.
inline double on_axis_gradient(double radius, double length, double remanence, double z) {
  const double r2 = radius * radius;
  return 0.5 * remanence *
         (r2 / std::pow((z + length) * (z + length) + r2, 1.5) -
          r2 / std::pow(z * z + r2, 1.5));
}

//
// Rectangular evaluation grid. Point index = (iz * ny + iy) * nx + ix.
//

struct GridSpec {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  std::array<int, 3> n{1, 1, 1};

  std::size_t size() const {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }

  Vec3 point(std::size_t index) const {
    const std::size_t ix = index % n[0];
    const std::size_t iy = (index / n[0]) % n[1];
    const std::size_t iz = index / (static_cast<std::size_t>(n[0]) * n[1]);
    const std::array<std::size_t, 3> idx{ix, iy, iz};
    Vec3 p;
    for (int a = 0; a < 3; ++a)
      p[a] = n[a] == 1 ? lo[a] : lo[a] + (hi[a] - lo[a]) * double(idx[a]) / (n[a] - 1);
    return p;
  }
};

inline std::vector<FieldSample> field_map(const CylindricalMagnet& magnet, const GridSpec& grid,
                                          unsigned threads = 1) {
  for (int a = 0; a < 3; ++a)
    if (grid.n[a] < 1)
      throw GeometryError("field_map: grid dimensions must be >= 1");
  std::vector<FieldSample> out(grid.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const Vec3 p = grid.point(i);
    try {
      out[i] = sample_at(magnet, p);
    } catch (const InsideMagnet&) {
      throw InsideMagnetAt("field_map: grid point " + std::to_string(i) +
                               " lies inside the magnet (or within the gradient stencil)",
                           static_cast<std::ptrdiff_t>(i));
    }
  });
  return out;
}

//
// Presets. The small magnet reproduces B_z = 0.63 T and dB_z/dz = -98 T/m on
// axis 1 mm above the pole face at a fixed 20 mm length; radius and remanence
// come from calibrate_magnet() and are frozen here. The large magnet doubles
// the diameter at the same length and remanence.
//

struct CalibrationTarget {
  double length = 20e-3;
  double probe_height = 1e-3;
  double field = 0.63;
  double gradient = -98.0;
};

struct CalibrationResult {
  double radius;
  double remanence;
};

/// Fits (radius, remanence) at fixed length. B/G on axis does not depend on
/// the remanence, so the radius is a 1D root find and the remanence follows.
inline CalibrationResult calibrate_magnet(const CalibrationTarget& t = {}) {
  const double ratio = t.field / t.gradient;
  auto residual = [&](double r) {
    return on_axis_field(r, t.length, 1.0, t.probe_height) /
               on_axis_gradient(r, t.length, 1.0, t.probe_height) -
           ratio;
  };
  boost::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      residual, 1e-4, 0.2, boost::math::tools::eps_tolerance<double>(52), iters);
  const double r = 0.5 * (lo + hi);
  return {r, t.field / on_axis_field(r, t.length, 1.0, t.probe_height)};
}

inline constexpr double small_magnet_radius = 7.4365883060269651e-3;
inline constexpr double small_magnet_remanence = 1.5567676099696133;
inline constexpr double preset_magnet_length = 20e-3;

inline CylindricalMagnet small_magnet() {
  return {small_magnet_radius, preset_magnet_length, small_magnet_remanence};
}

inline CylindricalMagnet large_magnet() {
  return {2.0 * small_magnet_radius, preset_magnet_length, small_magnet_remanence};
}

} // namespace spinforce

#endif // SPINFORCE_MAGNETOSTATICS_HPP
