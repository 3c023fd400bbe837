#pragma once

#include <array>
#include <vector>

#include "geozero/spin_core.hpp"
#include "geozero/units.hpp"

namespace geozero {

/// Static couplings of the ground-state triplet. Angular frequencies in rad/s;
/// the effective electric field carries whatever unit the dipole
/// coefficients are quoted per.
struct SystemParams {
  double D = units::mhz(2870.0);  // zero-field splitting
  double d_par = 0.0;
  double d_perp = 0.0;
  std::array<double, 3> Pi{0.0, 0.0, 0.0};
  double Delta = 0.0;  // axial Zeeman splitting
  double delta = units::mhz(3.04);
  double gamma_e = units::kGammaElectron;  // rad/s/T, sensing only

  /// Throws geozero::Error when D <= 0, delta < 0 or d_perp < 0.
  void validate() const;
  /// Requires |Delta|/delta < 0.1, the regime the zero-field sequences assume.
  void require_zero_field() const;
  /// Carrier frequency that satisfies the Raman resonance, D + d_par*Pi_z.
  double resonance() const { return D + d_par * Pi[2]; }

  bool operator==(const SystemParams&) const = default;
};

/// Linearly polarized drive along x.
struct DriveParams {
  double Omega = 0.0;  // amplitude, rad/s
  double omega = 0.0;  // carrier, rad/s
  double phi = 0.0;    // carrier phase, rad
};

struct DerivedCouplings {
  double delta_prime = 0.0;  // non-degenerate splitting
  double psi = 0.0;          // coupling phase in (-pi, pi]
  double omega_res = 0.0;
  double omega_bar = 0.0;  // sqrt(delta'^2 + Omega^2)
  double T_prime = 0.0;    // sqrt2*pi/delta'
  double Omega = 0.0;      // drive amplitude the couplings were evaluated at
};

/// Lab-frame Hamiltonian at time t.
Operator lab_hamiltonian(const SystemParams& p, const DriveParams& d, double t);

/// Time-independent Raman Hamiltonian in the frame rotating at the resonance
/// on the Sz^2 ladder:
///   (Omega e^{i phi}/2 |0> + delta' e^{i psi}/2 |->) <+| + h.c.
/// Requires Pi_x == 0 (polarization perpendicular to the transverse field).
Operator rwa_hamiltonian(const SystemParams& p, double Omega, double phi);

/// Same Hamiltonian from already derived couplings.
Operator rwa_hamiltonian(const DerivedCouplings& dc, double Omega, double phi);

/// Throws DegenerateSplitting when delta' == 0.
DerivedCouplings derived_couplings(const SystemParams& p, double Omega);

/// Convenience: couplings at the matching condition Omega = delta'.
DerivedCouplings matched_couplings(const SystemParams& p);

/// Generic 2pi duration for the {|0>,|+>} cycle at drive amplitude Omega, 2pi/sqrt(delta'^2+Omega^2).
double two_pi_duration(const DerivedCouplings& dc, double Omega);

struct RwaValidation {
  double max_infidelity = 0.0;
  double omega_ratio = 0.0;  // Omega/omega
  int checkpoints = 0;
  int initial_states = 0;
  long steps = 0;
};

/// Propagates a grid of initial states under the lab Hamiltonian (fine-step
/// integration followed by the rotating-frame transform) and under the RWA
/// Hamiltonian, reporting the worst state infidelity over the grid and over
/// `checkpoints` equally spaced times in (0, duration].
RwaValidation validate_rwa(const SystemParams& p, const DriveParams& d, double duration,
                           int steps_per_period = 10000, int checkpoints = 8);

}  // namespace geozero
