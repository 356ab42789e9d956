#ifndef SPINFORCE_TESTS_ORACLES_HPP
#define SPINFORCE_TESTS_ORACLES_HPP

// Independent reference computations used only by the tests.

#include <spinforce/spinforce.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using namespace spinforce;

/// B of a uniformly magnetized cylinder from Biot-Savart over its
/// equivalent surface current K = (Br / mu0) phi_hat on the side wall.
/// The azimuthal integral is periodic, so a plain trapezoid rule converges
/// geometrically; the axial one uses adaptive Gauss-Kronrod.
inline Vec3 biot_savart_field(const CylindricalMagnet& m, const Vec3& p, int n_phi = 2048) {
  const Vec3 q = p - m.pole_face_center;
  auto inner = [&](double zs, int comp) {
    double sum = 0.0;
    for (int k = 0; k < n_phi; ++k) {
      const double ph = 2.0 * pi * k / n_phi;
      const Vec3 src(m.radius * std::cos(ph), m.radius * std::sin(ph), zs);
      const Vec3 t(-std::sin(ph), std::cos(ph), 0.0);
      const Vec3 r = q - src;
      const double d = r.norm();
      sum += t.cross(r)[comp] / (d * d * d);
    }
    return sum * 2.0 * pi / n_phi;
  };
  Vec3 b;
  for (int c = 0; c < 3; ++c) {
    auto f = [&](double zs) { return inner(zs, c); };
    b[c] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -m.length, 0.0, 15,
                                                                         1e-11);
  }
  return m.remanence / (4.0 * pi) * m.radius * b;
}

/// Distance from p to the closed cylinder surface (axis along z).
inline double distance_to_magnet(const CylindricalMagnet& m, const Vec3& p) {
  const Vec3 q = p - m.pole_face_center;
  const double rho = std::hypot(q.x(), q.y());
  const double dz = std::max({q.z(), -m.length - q.z(), 0.0});
  const double dr = std::max(rho - m.radius, 0.0);
  return std::hypot(dz, dr);
}

/// Random exterior points at least `margin` from the magnet surface.
inline std::vector<Vec3> exterior_points(const CylindricalMagnet& m, int n, double margin,
                                         unsigned seed = 7) {
  std::mt19937_64 rng(seed);
  const double r = m.radius;
  std::uniform_real_distribution<double> ux(-3.0 * r, 3.0 * r);
  std::uniform_real_distribution<double> uz(-m.length - 3.0 * r, 3.0 * r);
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Vec3 p = m.pole_face_center + Vec3(ux(rng), ux(rng), uz(rng));
    if (distance_to_magnet(m, p) >= margin && !m.contains(p))
      pts.push_back(p);
  }
  return pts;
}

/// Point-dipole field of the magnet's total moment, measured from its centre.
inline Vec3 dipole_field(const CylindricalMagnet& m, const Vec3& p) {
  const double moment = m.remanence / default_constants.mu_0 * pi * m.radius * m.radius * m.length;
  const Vec3 mvec = moment * m.axis;
  const Vec3 r = p - (m.pole_face_center - 0.5 * m.length * m.axis);
  const double d = r.norm();
  const Vec3 u = r / d;
  return default_constants.mu_0 / (4.0 * pi * d * d * d) * (3.0 * u * u.dot(mvec) - mvec);
}

/// exp(A) by scaling and squaring with a Taylor series.
inline CMat3 expm(const CMat3& a) {
  int s = 0;
  double n = a.norm();
  while (n > 0.5) {
    n *= 0.5;
    ++s;
  }
  const CMat3 x = a / std::pow(2.0, s);
  CMat3 term = CMat3::Identity(), sum = CMat3::Identity();
  for (int k = 1; k < 30; ++k) {
    term = term * x / double(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i)
    sum = sum * sum;
  return sum;
}

inline CMat3 thermal_density(const CMat3& h, double temperature) {
  const CMat3 e = expm(-h / (default_constants.k_B * temperature));
  return e / e.trace();
}

/// Seven-level steady state for a field along the NV axis, where every
/// level is a pure m_s state. Level order: g(+1), g(0), g(-1), e(+1), e(0),
/// e(-1), singlet. Returns ground populations in (+1, 0, -1) order.
inline Vec3 aligned_seven_level(double b_axial, double intensity, const SevenLevelParams& p,
                                double temperature) {
  const auto& c = default_constants;
  const double e[3] = {c.h * (c.D_gs + c.gamma_e * b_axial), 0.0,
                       c.h * (c.D_gs - c.gamma_e * b_axial)};
  double w[3], z = 0.0;
  for (int i = 0; i < 3; ++i)
    z += w[i] = std::exp(-e[i] / (c.k_B * temperature));
  for (double& x : w)
    x /= z;

  Eigen::Matrix<double, 7, 7> k = Eigen::Matrix<double, 7, 7>::Zero(); // k(to, from)
  const double pump = p.k_pump_per_intensity * intensity;
  for (int m = 0; m < 3; ++m) {
    k(3 + m, m) = pump;
    k(m, 3 + m) = p.k_rad;
    k(6, 3 + m) = m == 1 ? p.k_isc_ms0 : p.k_isc_ms1;
    k(m, 6) = m == 1 ? p.k_s0 : p.k_s1;
    for (int j = 0; j < 3; ++j)
      if (j != m)
        k(j, m) += w[j] / p.T1;
  }
  Eigen::Matrix<double, 7, 7> a = k;
  for (int i = 0; i < 7; ++i)
    a(i, i) = -k.col(i).sum();
  a.row(6).setOnes();
  Eigen::Matrix<double, 7, 1> rhs = Eigen::Matrix<double, 7, 1>::Zero();
  rhs[6] = 1.0;
  const Eigen::Matrix<double, 7, 1> n = a.colPivHouseholderQr().solve(rhs);
  Vec3 g(n[0], n[1], n[2]);
  return g / g.sum();
}

/// Area of a disk of radius r clipped to the strip |x| <= a.
inline double clipped_disk_area(double r, double a) {
  a = std::min(a, r);
  return 2.0 * (a * std::sqrt(r * r - a * a) + r * r * std::asin(a / r));
}

} // namespace oracle

#endif // SPINFORCE_TESTS_ORACLES_HPP
