#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "vfshm/core_types.hpp"

namespace vfshm {

/// Spring-mass-damper chain: n masses, n+1 springs/dampers, both end masses
/// grounded. Spring/damper i joins mass i-1 and mass i (index 0 and n are the
/// ground connections).
struct MdofSystem {
  std::vector<double> masses;          // kg
  std::vector<double> stiffnesses;     // N/m, size n+1
  std::vector<double> damping_coeffs;  // N s/m, size n+1
  std::size_t force_dof = 0;
  std::size_t response_dof = 0;

  void validate() const;
  std::size_t dofs() const noexcept { return masses.size(); }

  friend bool operator==(const MdofSystem&, const MdofSystem&) = default;
};

/// Five 0.1 kg masses, 200 kN/m springs, 0.05 N s/m dampers, drive point at m1.
MdofSystem reference_five_dof();

struct DamageEdit {
  std::size_t element = 0;  // spring/damper index, 0-based
  double stiffness_factor = 1.0;
  double damping_factor = 1.0;
};

/// Copy of `sys` with the listed spring/damper elements scaled.
MdofSystem apply_damage(const MdofSystem& sys, const std::vector<DamageEdit>& edits);

/// The benchmark damage: second spring x0.75 and second damper x1.25.
MdofSystem reference_five_dof_damaged();

/// Five 1 g masses, 98.7 MN/m springs, 0.6 N s/m dampers: modes 2-5 fall in
/// 30-100 kHz, a stand-in host for impedance simulations.
MdofSystem emi_host_chain();

/// Receptance e_r^T (K - w^2 M + i w C)^-1 e_f on every grid point.
FrequencyResponse mdof_frf(const MdofSystem& sys, const FrequencyGrid& grid);
Complex mdof_frf(const MdofSystem& sys, double frequency_hz);

/// Eigenvalues (rad/s) of the first-order state-space form, as adjacent
/// conjugate pairs sorted by |Im|. Undamped systems give exactly imaginary poles.
std::vector<Complex> mdof_poles(const MdofSystem& sys);

/// Pole-residue expansion of the receptance from the state-space eigenvectors.
/// Requires a damped (strictly stable) system.
RationalModel mdof_modal_model(const MdofSystem& sys);

/// Mechanical impedance F/v = 1 / (i w H(i w)) seen at the drive point.
std::function<Complex(double)> mdof_mechanical_impedance(const MdofSystem& sys);

/// Piezoelectric wafer parameters. Losses follow Im(s11E) <= 0, Im(eps33) <= 0.
struct PztParams {
  double b = 0.0;    // width, m
  double h = 0.0;    // thickness, m
  double l = 0.0;    // length, m
  double d13 = 0.0;  // m/V
  Complex s11E;      // 1/Pa
  Complex eps33;     // F/m
  double rho = 0.0;  // kg/m^3

  void validate() const;
};

/// 12.7 x 12.7 x 0.2 mm PZT-5H wafer with 1% mechanical / 2% dielectric loss.
PztParams pzt5h_wafer();

struct EmiResult {
  FrequencyResponse impedance;
  /// Grid indices where kl sat within 1e-9 of a tan() pole; the finite limit
  /// value is reported there.
  std::vector<std::size_t> flagged;
};

/// Electrical impedance of a wafer bonded to a structure of mechanical
/// impedance z_structure(omega).
EmiResult emi_coupled_impedance(const PztParams& pzt,
                                const std::function<Complex(double)>& z_structure,
                                const FrequencyGrid& grid);

}  // namespace vfshm
