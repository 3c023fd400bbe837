#pragma once

#include <utility>
#include <vector>

#include "geozero/hamiltonian.hpp"
#include "geozero/propagation.hpp"

namespace geozero {

enum class GateKind { kUPhi, kGTheta };

struct GateSpec {
  GateKind kind = GateKind::kUPhi;
  double phi = 0.0;
  double theta = 0.0;     // G_theta only
  double duration = 0.0;  // T' for U_phi, 2T' for G_theta
};

GateSpec make_gate_spec(const DerivedCouplings& dc, GateKind kind, double phi, double theta = 0.0);

/// 2pi pulse of duration T' at the matching condition Omega = delta'.
///
/// Built in closed form: the pulse is -1 on span{|+>, |phi'>} and +1 on the
/// dark state |phi'_perp>. `dc` must have been derived at Omega = delta'.
Propagator u_phi(const DerivedCouplings& dc, double phi);

/// G_theta = U_phi U_{phi+theta}: the phi+theta pulse acts first.
/// Equals diag(1, e^{-i theta}, e^{i theta}) in the (|+>, |0>, |->) ordering.
Propagator g_theta(const DerivedCouplings& dc, double phi, double theta);

struct CompositePair {
  Propagator forward;      // U_phi U_{phi+pi}
  Propagator interchanged;  // U_{phi+pi} U_phi
};

/// How the length of each 2pi pulse is chosen when the drive amplitude is off.
enum class PulseLength {
  kCalibrated,  // full cycle at the actual drive, 2pi/sqrt(delta'^2 + Omega^2)
  kNominal,     // fixed at T' = sqrt2*pi/delta'
};

/// The 4pi composite and its phase-interchanged twin at drive amplitude
/// dc.Omega. At Omega = delta' both reduce to diag(1, -1, -1) on
/// (|+>, |0>, |->). With calibrated pulse lengths each 2pi pulse is a
/// reflection, so the twin is exactly the inverse of the forward composite.
CompositePair composite_4pi_pair(const DerivedCouplings& dc, double phi,
                                 PulseLength length = PulseLength::kCalibrated);

enum class BlockVariant { kInterlaced, kPlain };

/// Infidelity of a ZDD-8 block without free evolution, starting from |+1>,
/// at drive amplitude delta'(1+epsilon) for each epsilon.
std::vector<double> robustness_scan(const DerivedCouplings& dc, const std::vector<double>& epsilons,
                                    BlockVariant variant, PulseLength length = PulseLength::kCalibrated);

/// Least-squares slope of log(infidelity) against log|epsilon|.
double log_log_slope(const std::vector<double>& epsilons, const std::vector<double>& infidelities);

}  // namespace geozero
