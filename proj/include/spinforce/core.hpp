#ifndef SPINFORCE_CORE_HPP
#define SPINFORCE_CORE_HPP

// Shared physics primitives: constants, spin-1 operators, NV axis frames and
// the 3x3 Hermitian eigensolve used by the spin model.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spinforce {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

//
// Errors. Every failure raised by the library derives from `error`; the
// `numerical_error` branch is what the CLI reports with exit code 3.
//

class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class numerical_error : public error {
public:
  using error::error;
};

class domain_error : public error {
public:
  using error::error;
};

#define SPINFORCE_DEFINE_ERROR(Name, Base)                                      \
  class Name : public Base {                                                   \
  public:                                                                      \
    using Base::Base;                                                          \
  };

SPINFORCE_DEFINE_ERROR(NotHermitian, numerical_error)
SPINFORCE_DEFINE_ERROR(NotUnitary, numerical_error)
SPINFORCE_DEFINE_ERROR(SingularRateMatrix, numerical_error)
SPINFORCE_DEFINE_ERROR(UnstableStep, numerical_error)
SPINFORCE_DEFINE_ERROR(InsideMagnet, domain_error)
SPINFORCE_DEFINE_ERROR(FieldOutOfRange, domain_error)
SPINFORCE_DEFINE_ERROR(NonPositiveTemperature, domain_error)
SPINFORCE_DEFINE_ERROR(GeometryError, domain_error)
SPINFORCE_DEFINE_ERROR(DutyOutOfRange, domain_error)
SPINFORCE_DEFINE_ERROR(TooShort, domain_error)
SPINFORCE_DEFINE_ERROR(BandOutOfRange, domain_error)
SPINFORCE_DEFINE_ERROR(ParseError, domain_error)
SPINFORCE_DEFINE_ERROR(NonuniformSampling, domain_error)

#undef SPINFORCE_DEFINE_ERROR

//
// Physical constants (SI). Frequencies stay in Hz; energies are formed as
// h * f only where needed.
//

struct PhysicalConstants {
  double h = 6.62607015e-34;       // J s
  double k_B = 1.380649e-23;       // J/K
  double gamma_e = 28.0e9;         // Hz/T
  double D_gs = 2.87e9;            // Hz
  double mu_0 = 4.0e-7 * pi;       // T m/A
};

inline constexpr PhysicalConstants default_constants{};

//
// Spin-1 operators in the (|+1>, |0>, |-1>) ordering.
//

struct SpinOperators {
  CMat3 Sx;
  CMat3 Sy;
  CMat3 Sz;
};

inline const SpinOperators& spin1() {
  static const SpinOperators ops = [] {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx i{0.0, 1.0};
    SpinOperators s;
    s.Sx << 0, r, 0,
            r, 0, r,
            0, r, 0;
    s.Sy << 0, -i * r, 0,
            i * r, 0, -i * r,
            0, i * r, 0;
    s.Sz << 1, 0, 0,
            0, 0, 0,
            0, 0, -1;
    return s;
  }();
  return ops;
}

/// Spin expectation vector (<Sx>, <Sy>, <Sz>) of a density matrix.
inline Vec3 spin_expectation(const CMat3& rho) {
  const auto& s = spin1();
  return {(rho * s.Sx).trace().real(), (rho * s.Sy).trace().real(),
          (rho * s.Sz).trace().real()};
}

//
// NV axis orientation and the NV -> lab rotation.
//

struct NVOrientation {
  double theta = 0.0; // polar angle of the NV axis in the lab frame (rad)
  double phi = 0.0;   // azimuth (rad)
  int index = 1;
};

/// Polar angle of a <111> axis measured from [001].
inline const double tetrahedral_polar_angle = std::acos(1.0 / std::sqrt(3.0));

/// The four <111> axes seen from a [100]-cut slab, azimuths 45..315 deg.
inline std::array<NVOrientation, 4> default_orientations() {
  std::array<NVOrientation, 4> o{};
  for (int k = 0; k < 4; ++k)
    o[k] = {tetrahedral_polar_angle, pi / 4.0 + k * pi / 2.0, k + 1};
  return o;
}

/// R = Rz(phi) * Ry(theta); maps NV-frame vector components to the lab frame.
inline Mat3 rotation_matrix(const NVOrientation& orient) {
  const double ct = std::cos(orient.theta), st = std::sin(orient.theta);
  const double cp = std::cos(orient.phi), sp = std::sin(orient.phi);
  Mat3 rz, ry;
  rz << cp, -sp, 0,
        sp, cp, 0,
        0, 0, 1;
  ry << ct, 0, st,
        0, 1, 0,
        -st, 0, ct;
  return rz * ry;
}

//
// Hermitian eigensolve.
//

struct HermitianEigen {
  Vec3 values;   // ascending
  CMat3 vectors; // columns are eigenvectors
};

/// Eigen-decomposition of a 3x3 Hermitian matrix. Throws NotHermitian when
/// ||H - H^dagger|| exceeds 1e-9 ||H||.
inline HermitianEigen eigensolve_hermitian3(const CMat3& h) {
  const double scale = h.norm();
  if (!std::isfinite(scale))
    throw NotHermitian("eigensolve_hermitian3: non-finite matrix entries");
  if ((h - h.adjoint()).norm() > 1e-9 * scale)
    throw NotHermitian("eigensolve_hermitian3: matrix is not Hermitian");
  if (scale == 0.0)
    return {Vec3::Zero(), CMat3::Identity()};
  // Solve on the unit-norm matrix; SI energies are ~1e-23 J.
  const CMat3 hn = 0.5 * (h + h.adjoint()) / scale;
  Eigen::SelfAdjointEigenSolver<CMat3> es(hn);
  if (es.info() != Eigen::Success)
    throw NotHermitian("eigensolve_hermitian3: eigensolver did not converge");
  return {es.eigenvalues() * scale, es.eigenvectors()};
}

} // namespace spinforce

#endif // SPINFORCE_CORE_HPP
