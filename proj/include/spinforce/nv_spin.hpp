#ifndef SPINFORCE_NV_SPIN_HPP
#define SPINFORCE_NV_SPIN_HPP

// NV ground-state spin: Hamiltonian, Boltzmann state, optically pumped
// steady state from a seven-level population model, and the lab-frame
// magnetic moment per spin.
//
// All 3x3 matrices here are written in the NV-frame |m_s> basis
// (|+1>, |0>, |-1>) quantized along the NV axis. The field enters through its
// NV-frame components R^T B, which is unitarily equivalent to rotating S_z
// into the lab frame and keeps the spin characters |<e_i|m_s>|^2 that drive
// the optical rates directly readable.

#include "core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace spinforce {

struct NVHamiltonian {
  CMat3 matrix;           // J, NV-frame basis
  NVOrientation orientation;
  Vec3 B_local;           // lab frame, T
};

/// Field components in the NV frame of `orient`.
inline Vec3 to_nv_frame(const Vec3& b_lab, const NVOrientation& orient) {
  return rotation_matrix(orient).transpose() * b_lab;
}

/// h D Sz^2 + h gamma_e B.S for an arbitrary zero-field splitting (Hz).
inline CMat3 spin_hamiltonian(const Vec3& b_nv, double zfs_hz, const PhysicalConstants& c) {
  const auto& s = spin1();
  return c.h * zfs_hz * (s.Sz * s.Sz) +
         c.h * c.gamma_e * (b_nv.x() * s.Sx + b_nv.y() * s.Sy + b_nv.z() * s.Sz);
}

inline constexpr double max_field_tesla = 10.0;

inline NVHamiltonian build_hamiltonian(const Vec3& b_local, const NVOrientation& orient,
                                       const PhysicalConstants& c = default_constants) {
  if (!b_local.allFinite() || !(b_local.norm() < max_field_tesla))
    throw FieldOutOfRange("build_hamiltonian: |B| must be finite and below 10 T");
  return {spin_hamiltonian(to_nv_frame(b_local, orient), c.D_gs, c), orient, b_local};
}

//
// Density matrices.
//

class DensityMatrix3 {
public:
  DensityMatrix3() : m_(CMat3::Identity() / 3.0) {}

  /// Checks unit trace (1e-12), hermiticity and eigenvalues >= -1e-12.
  static DensityMatrix3 from_matrix(const CMat3& m) {
    if (std::abs(m.trace() - cplx(1.0, 0.0)) > 1e-12)
      throw numerical_error("DensityMatrix3: trace differs from 1");
    const auto eig = eigensolve_hermitian3(m);
    if (eig.values.minCoeff() < -1e-12)
      throw numerical_error("DensityMatrix3: matrix is not positive semidefinite");
    return DensityMatrix3(m);
  }

  static DensityMatrix3 diagonal(const Vec3& populations) {
    CMat3 m = CMat3::Zero();
    for (int i = 0; i < 3; ++i)
      m(i, i) = populations[i];
    return from_matrix(m);
  }

  const CMat3& matrix() const noexcept { return m_; }
  double population(int i) const { return m_(i, i).real(); }

private:
  explicit DensityMatrix3(const CMat3& m) : m_(m) {}
  CMat3 m_;
};

/// Boltzmann weights exp(-E_j / k_B T) / Z, stable for any energy offset.
inline Vec3 boltzmann_populations(const Vec3& energies, double temperature,
                                  const PhysicalConstants& c = default_constants) {
  if (!(temperature > 0.0))
    throw NonPositiveTemperature("temperature must be > 0 K");
  const double e0 = energies.minCoeff();
  Vec3 w;
  for (int j = 0; j < 3; ++j)
    w[j] = std::exp(-(energies[j] - e0) / (c.k_B * temperature));
  return w / w.sum();
}

/// rho = U rho_e U^dagger, U holding eigenvectors as columns. Throws
/// NotUnitary when ||U^dagger U - 1|| > 1e-10.
inline DensityMatrix3 to_spin_basis(const DensityMatrix3& rho_e, const CMat3& u) {
  if ((u.adjoint() * u - CMat3::Identity()).norm() > 1e-10)
    throw NotUnitary("to_spin_basis: eigenvector matrix is not unitary");
  CMat3 r = u * rho_e.matrix() * u.adjoint();
  r = 0.5 * (r + r.adjoint());
  return DensityMatrix3::from_matrix(r);
}

inline DensityMatrix3 thermal_state(const NVHamiltonian& h, double temperature,
                                    const PhysicalConstants& c = default_constants) {
  if (!(temperature > 0.0))
    throw NonPositiveTemperature("thermal_state: temperature must be > 0 K");
  const auto eig = eigensolve_hermitian3(h.matrix);
  return to_spin_basis(DensityMatrix3::diagonal(boltzmann_populations(eig.values, temperature, c)),
                       eig.vectors);
}

//
// Seven-level optical pumping model.
//
// Levels 0..2: ground-state eigenstates (ascending energy), 3..5: excited-
// state eigenstates, 6: metastable singlet. Rates between eigenstates are the
// zero-field rates weighted by spin-character overlaps,
//
//   k(i -> j) = sum_p |<g_i|p>|^2 |<e_j|p>|^2 k_p,
//
// so optical excitation and radiative decay conserve m_s while the shelving
// through the singlet is m_s-selective.
//

struct SevenLevelParams {
  // Absorption cross-section ~3.1e-21 m^2 at 532 nm gives ~8 Hz per mW/mm^2;
  // doubled so the force saturates within the 0-50 mW sweep.
  double k_pump_per_intensity = 16.0; // Hz per mW/mm^2
  // Room-temperature photophysics, Tetienne et al., NJP 14, 103033 (2012).
  double k_rad = 65.0e6;    // Hz, excited -> ground, spin conserving
  double k_isc_ms0 = 11.0e6; // Hz, excited m_s = 0 -> singlet
  double k_isc_ms1 = 80.0e6; // Hz, excited m_s = +-1 -> singlet
  double k_s0 = 3.0e6;      // Hz, singlet -> ground m_s = 0
  double k_s1 = 2.6e6;      // Hz, singlet -> each ground m_s = +-1
  double D_es = 1.42e9;     // Hz, excited-state zero-field splitting
  double T1 = 5e-3;         // s, ground-state longitudinal relaxation
  bool excited_state_hamiltonian = true; // false: excited characters = ground

  void validate() const {
    const double rates[] = {k_pump_per_intensity, k_rad, k_isc_ms0, k_isc_ms1, k_s0, k_s1};
    for (double r : rates)
      if (!(r >= 0.0) || !std::isfinite(r))
        throw domain_error("SevenLevelParams: rates must be finite and >= 0");
    if (!(k_isc_ms1 > k_isc_ms0))
      throw domain_error("SevenLevelParams: k_isc_ms1 must exceed k_isc_ms0");
    if (!(T1 > 0.0))
      throw domain_error("SevenLevelParams: T1 must be > 0 (use infinity to disable)");
  }
};

struct LaserDrive {
  double intensity = 0.0; // mW/mm^2
  bool wavelength_polarizing = true; // 532 nm: true, 980 nm control: false
};

using Rates7 = Eigen::Matrix<double, 7, 7>;
using Vec7 = Eigen::Matrix<double, 7, 1>;

struct SteadyState {
  DensityMatrix3 eigenbasis; // rho_e, diagonal
  DensityMatrix3 spin_basis; // rho in the NV m_s basis
  CMat3 eigenvectors;        // ground-state U
  Vec7 populations;          // all seven levels, sum 1
};

/// Generator M of dn/dt = M n. Column i holds the outflow of level i.
inline Rates7 rate_matrix(const HermitianEigen& ground, const HermitianEigen& excited,
                          const Vec3& thermal, double pump, const SevenLevelParams& p) {
  const Eigen::Matrix3d a = ground.vectors.cwiseAbs2();  // (m_s, i)
  const Eigen::Matrix3d b = excited.vectors.cwiseAbs2(); // (m_s, j)
  const Vec3 isc{p.k_isc_ms1, p.k_isc_ms0, p.k_isc_ms1};
  const Vec3 singlet{p.k_s1, p.k_s0, p.k_s1};
  Rates7 m = Rates7::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double overlap = a.col(i).dot(b.col(j));
      m(3 + j, i) += pump * overlap;
      m(i, 3 + j) += p.k_rad * overlap;
    }
  for (int j = 0; j < 3; ++j) {
    m(6, 3 + j) += b.col(j).dot(isc);
    m(j, 6) += a.col(j).dot(singlet);
  }
  if (std::isfinite(p.T1)) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j)
          m(j, i) += thermal[j] / p.T1;
  }
  for (int i = 0; i < 7; ++i)
    m(i, i) = -(m.col(i).sum() - m(i, i));
  return m;
}

/// Normalized null vector of a rate generator. Throws SingularRateMatrix
/// unless the kernel is one-dimensional: the second-smallest singular value
/// must exceed 1e-8 of the largest.
inline Vec7 rate_null_vector(const Rates7& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(scale > 0.0))
    throw SingularRateMatrix("rate matrix is zero");
  const Rates7 mn = m / scale;
  Eigen::JacobiSVD<Rates7> svd(mn);
  const auto& sv = svd.singularValues(); // descending
  if (!(sv[5] > 1e-8 * sv[0]))
    throw SingularRateMatrix("rate matrix null space is not one-dimensional");
  // Replace one balance equation by the normalization sum(n) = 1.
  Rates7 a = mn;
  a.row(6).setOnes();
  Vec7 rhs = Vec7::Zero();
  rhs[6] = 1.0;
  Vec7 n = a.fullPivLu().solve(rhs);
  return n;
}

inline SteadyState seven_level_steady_state(const NVHamiltonian& h, const LaserDrive& drive,
                                            const SevenLevelParams& params, double temperature,
                                            const PhysicalConstants& c = default_constants) {
  if (!(drive.intensity >= 0.0))
    throw domain_error("seven_level_steady_state: intensity must be >= 0");
  params.validate();
  const auto ground = eigensolve_hermitian3(h.matrix);
  const Vec3 thermal = boltzmann_populations(ground.values, temperature, c);

  if (drive.intensity == 0.0 || !drive.wavelength_polarizing) {
    const auto rho_e = DensityMatrix3::diagonal(thermal);
    Vec7 pops = Vec7::Zero();
    pops.head<3>() = thermal;
    return {rho_e, to_spin_basis(rho_e, ground.vectors), ground.vectors, pops};
  }

  const auto excited =
      params.excited_state_hamiltonian
          ? eigensolve_hermitian3(spin_hamiltonian(to_nv_frame(h.B_local, h.orientation),
                                                   params.D_es, c))
          : ground;
  const double pump = params.k_pump_per_intensity * drive.intensity;
  const Vec7 n = rate_null_vector(rate_matrix(ground, excited, thermal, pump, params));
  Vec3 g = n.head<3>();
  g /= g.sum();
  const auto rho_e = DensityMatrix3::diagonal(g);
  return {rho_e, to_spin_basis(rho_e, ground.vectors), ground.vectors, n};
}

/// m_lab = -h gamma_e R <S>_NV (J/T).
inline Vec3 lab_moment(const DensityMatrix3& rho, const NVOrientation& orient,
                       const PhysicalConstants& c = default_constants) {
  return -c.h * c.gamma_e * (rotation_matrix(orient) * spin_expectation(rho.matrix()));
}

} // namespace spinforce

#endif // SPINFORCE_NV_SPIN_HPP
