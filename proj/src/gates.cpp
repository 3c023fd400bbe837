#include "geozero/gates.hpp"

#include <cmath>
#include <stdexcept>

#include "geozero/errors.hpp"

namespace geozero {

namespace {

void require_matched(const DerivedCouplings& dc) {
  if (!(dc.delta_prime > 0.0)) throw DegenerateSplitting("gate: delta' must be positive");
  if (std::abs(dc.Omega - dc.delta_prime) > 1e-12 * dc.delta_prime) {
    throw Error("gate: U_phi is only defined at the matching condition Omega = delta'");
  }
}

Propagator pulse(const DerivedCouplings& dc, double Omega, double phi, PulseLength length) {
  const double duration = length == PulseLength::kCalibrated ? two_pi_duration(dc, Omega) : dc.T_prime;
  return evolve_constant(rwa_hamiltonian(dc, Omega, phi), duration);
}

}  // namespace

GateSpec make_gate_spec(const DerivedCouplings& dc, GateKind kind, double phi, double theta) {
  GateSpec g{kind, phi, theta, 0.0};
  g.duration = kind == GateKind::kUPhi ? dc.T_prime : 2.0 * dc.T_prime;
  return g;
}

Propagator u_phi(const DerivedCouplings& dc, double phi) {
  require_matched(dc);
  const Amplitudes plus = dressed::plus().amplitudes();
  const Amplitudes bright = dressed::phi_prime(phi, dc.psi).amplitudes();
  const Operator projector = plus * plus.adjoint() + bright * bright.adjoint();
  return {Operator::Identity() - 2.0 * projector, dc.T_prime};
}

Propagator g_theta(const DerivedCouplings& dc, double phi, double theta) {
  return compose(u_phi(dc, phi), u_phi(dc, phi + theta));
}

CompositePair composite_4pi_pair(const DerivedCouplings& dc, double phi, PulseLength length) {
  if (!(dc.delta_prime > 0.0)) throw DegenerateSplitting("composite_4pi_pair: delta' must be positive");
  const Propagator first = pulse(dc, dc.Omega, phi, length);
  const Propagator second = pulse(dc, dc.Omega, phi + kPi, length);
  return {compose(first, second), compose(second, first)};
}

std::vector<double> robustness_scan(const DerivedCouplings& dc, const std::vector<double>& epsilons,
                                    BlockVariant variant, PulseLength length) {
  std::vector<double> out;
  out.reserve(epsilons.size());
  const StateVector start = StateVector::basis(Level::kPlusOne);
  for (double eps : epsilons) {
    if (std::abs(eps) > 0.2) throw std::invalid_argument("robustness_scan: epsilon outside [-0.2, 0.2]");
    DerivedCouplings perturbed = dc;
    perturbed.Omega = dc.delta_prime * (1.0 + eps);
    const CompositePair pair = composite_4pi_pair(perturbed, 0.0, length);
    const Operator& second = variant == BlockVariant::kInterlaced ? pair.interchanged.matrix : pair.forward.matrix;
    Operator block = Operator::Identity();
    for (int k = 0; k < 4; ++k) block = second * pair.forward.matrix * block;
    // Eight ideal pi-equivalents compose to the identity.
    const double fidelity = std::norm(overlap(start, geozero::apply(block, start)));
    out.push_back(std::max(0.0, 1.0 - fidelity));
  }
  return out;
}

double log_log_slope(const std::vector<double>& epsilons, const std::vector<double>& infidelities) {
  if (epsilons.size() != infidelities.size() || epsilons.size() < 2) {
    throw std::invalid_argument("log_log_slope: need at least two matching points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(epsilons.size());
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const double x = std::log(std::abs(epsilons[i]));
    const double y = std::log(infidelities[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace geozero
