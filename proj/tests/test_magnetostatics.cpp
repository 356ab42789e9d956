#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace spinforce;

TEST(Cel, CompleteEllipticSpecialCases) {
  // cel(kc, 1, 1, 1) = K(k), cel(kc, 1, 1, kc^2) = E(k)
  const double k = 0.6, kc = std::sqrt(1.0 - k * k);
  EXPECT_NEAR(cel(kc, 1.0, 1.0, 1.0), std::comp_ellint_1(k), 1e-13);
  EXPECT_NEAR(cel(kc, 1.0, 1.0, kc * kc), std::comp_ellint_2(k), 1e-13);
  EXPECT_NEAR(cel(1.0, 1.0, 1.0, 1.0), 0.5 * pi, 1e-14);
}

TEST(Field, OnAxisMatchesClosedForm) {
  const auto m = small_magnet();
  for (double z : {0.1e-3, 1e-3, 3e-3, 10e-3, 50e-3}) {
    const Vec3 b = field_at(m, Vec3(0, 0, z));
    const double bz = on_axis_field(m.radius, m.length, m.remanence, z);
    EXPECT_NEAR(b.z(), bz, 1e-11 * std::abs(bz)) << z;
    EXPECT_NEAR(b.x(), 0.0, 1e-15);
    const double g = gradient_at(m, Vec3(0, 0, z))(2, 2);
    EXPECT_NEAR(g, on_axis_gradient(m.radius, m.length, m.remanence, z),
                1e-6 * std::abs(g)) << z;
  }
}

TEST(Field, MatchesSurfaceCurrentQuadrature) {
  const auto m = small_magnet();
  for (const Vec3& p : oracle::exterior_points(m, 20, 0.1 * m.radius, 21)) {
    const Vec3 ref = oracle::biot_savart_field(m, p);
    const Vec3 b = field_at(m, p);
    EXPECT_LT((b - ref).norm(), 1e-4 * ref.norm()) << p.transpose();
  }
}

TEST(Field, DipoleLimitFarAway) {
  const auto m = small_magnet();
  const Vec3 centre = m.pole_face_center - 0.5 * m.length * m.axis;
  const double d = 20.0 * m.radius;
  for (const Vec3& dir : {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(1, 1, 1).normalized()}) {
    const Vec3 p = centre + d * dir;
    const Vec3 ref = oracle::dipole_field(m, p);
    EXPECT_LT((field_at(m, p) - ref).norm(), 0.01 * ref.norm()) << dir.transpose();
  }
}

TEST(Field, DivergenceFreeAndCurlFree) {
  const auto m = small_magnet();
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j)
      for (int k = 0; k < 11; ++k) {
        const Vec3 p(-1.5 * m.radius + 3.0 * m.radius * i / 10.0,
                     -1.5 * m.radius + 3.0 * m.radius * j / 10.0, 0.5e-3 + 9.5e-3 * k / 10.0);
        const Mat3 g = gradient_at(m, p);
        const double scale = g.norm();
        ASSERT_LT(std::abs(g.trace()), 1e-6 * scale) << p.transpose();
        ASSERT_LT((g - g.transpose()).norm(), 1e-6 * scale) << p.transpose();
      }
}

TEST(Field, AxisymmetricAndMirrorSymmetric) {
  const auto m = small_magnet();
  const Vec3 p(2e-3, 0.0, 1e-3);
  const Vec3 b = field_at(m, p);
  for (double phi : {0.3, 1.9, 4.0}) {
    const Eigen::AngleAxisd rot(phi, Vec3::UnitZ());
    EXPECT_LT((field_at(m, rot * p) - rot * b).norm(), 1e-13 * b.norm());
  }
  // Mirror through the mid-plane: B_z even, B_rho odd.
  const Vec3 q(3e-3, 1e-3, 2e-3);
  const Vec3 q_mirror(q.x(), q.y(), -m.length - q.z());
  const Vec3 b1 = field_at(m, q), b2 = field_at(m, q_mirror);
  EXPECT_NEAR(b1.z(), b2.z(), 1e-12 * b1.norm());
  EXPECT_NEAR(b1.x(), -b2.x(), 1e-12 * b1.norm());
}

TEST(Field, ScalesLinearlyWithRemanence) {
  auto m = small_magnet();
  const Vec3 p(1e-3, 2e-3, 1.5e-3);
  const Vec3 b = field_at(m, p);
  m.remanence *= 2.0;
  EXPECT_LT((field_at(m, p) - 2.0 * b).norm(), 1e-14 * b.norm());
}

TEST(Field, InsideMagnetThrows) {
  const auto m = small_magnet();
  EXPECT_THROW(field_at(m, Vec3(0, 0, -1e-3)), InsideMagnet);
  EXPECT_NO_THROW(field_at(m, Vec3(0, 0, 1e-3)));
}

TEST(FieldMap, ReportsOffendingIndex) {
  const auto m = small_magnet();
  GridSpec g{Vec3(0, 0, -2e-3), Vec3(0, 0, 2e-3), {1, 1, 5}};
  try {
    field_map(m, g);
    FAIL() << "expected InsideMagnetAt";
  } catch (const InsideMagnetAt& e) {
    EXPECT_EQ(e.index(), 0);
  }
}

TEST(FieldMap, IndexOrderAndThreadIndependence) {
  const auto m = small_magnet();
  GridSpec g{Vec3(-2e-3, -1e-3, 1e-3), Vec3(2e-3, 1e-3, 4e-3), {5, 3, 4}};
  const auto a = field_map(m, g, 1);
  const auto b = field_map(m, g, 4);
  ASSERT_EQ(a.size(), 60u);
  EXPECT_EQ(a[(2 * 3 + 1) * 5 + 3].position, Vec3(1e-3, 0.0, 3e-3));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].B, b[i].B);
    EXPECT_EQ(a[i].gradB, b[i].gradB);
  }
}

TEST(Calibration, ReproducesPresets) {
  const auto c = calibrate_magnet();
  EXPECT_NEAR(c.radius, small_magnet_radius, 1e-12);
  EXPECT_NEAR(c.remanence, small_magnet_remanence, 1e-10);
  const auto m = small_magnet();
  const Vec3 p(0, 0, 1e-3);
  EXPECT_NEAR(field_at(m, p).z(), 0.63, 1e-9);
  EXPECT_NEAR(gradient_at(m, p)(2, 2), -98.0, 1e-6);
}

TEST(Calibration, LargeMagnetHasWeakerGradientNearFace) {
  const auto s = small_magnet(), l = large_magnet();
  const Vec3 p(0, 0, 1e-3);
  EXPECT_GT(std::abs(gradient_at(s, p)(2, 2)), std::abs(gradient_at(l, p)(2, 2)));
}
