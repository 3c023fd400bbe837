#include "geozero/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geozero/errors.hpp"
#include "geozero/propagation.hpp"

namespace geozero {

void SystemParams::validate() const {
  if (!(D > 0.0)) throw Error("SystemParams: zero-field splitting D must be positive");
  if (delta < 0.0) throw Error("SystemParams: hyperfine splitting delta must be non-negative");
  if (d_perp < 0.0) throw Error("SystemParams: d_perp must be non-negative");
}

void SystemParams::require_zero_field() const {
  validate();
  if (Delta == 0.0) return;
  if (delta == 0.0 || std::abs(Delta) / delta >= 0.1) {
    throw Error("SystemParams: |Delta|/delta = " + std::to_string(delta == 0.0 ? INFINITY : std::abs(Delta) / delta) +
                " is outside the zero-field regime (< 0.1)");
  }
}

Operator lab_hamiltonian(const SystemParams& p, const DriveParams& d, double t) {
  const auto& s = spin_operators();
  const Operator sz2 = s.z * s.z;
  Operator h = (p.D + p.d_par * p.Pi[2]) * sz2;
  h += (p.Delta + 0.5 * p.delta) * s.z;
  h += d.Omega * std::cos(d.omega * t + d.phi) * s.x;
  h += p.d_perp * (p.Pi[0] * (s.y * s.y - s.x * s.x) + p.Pi[1] * (s.x * s.y + s.y * s.x));
  return h;
}

DerivedCouplings derived_couplings(const SystemParams& p, double Omega) {
  const double transverse = 2.0 * p.d_perp * p.Pi[1];
  const double delta_prime = std::hypot(p.delta, transverse);
  if (delta_prime == 0.0) {
    throw DegenerateSplitting("derived_couplings: delta' = 0, the 2pi-pulse duration is undefined");
  }
  DerivedCouplings dc;
  dc.delta_prime = delta_prime;
  dc.psi = std::atan2(-transverse, p.delta);
  if (dc.psi == -kPi) dc.psi = kPi;
  dc.omega_res = p.resonance();
  dc.omega_bar = std::hypot(delta_prime, Omega);
  dc.T_prime = std::sqrt(2.0) * kPi / delta_prime;
  dc.Omega = Omega;
  return dc;
}

DerivedCouplings matched_couplings(const SystemParams& p) {
  DerivedCouplings dc = derived_couplings(p, 0.0);
  return derived_couplings(p, dc.delta_prime);
}

double two_pi_duration(const DerivedCouplings& dc, double Omega) {
  return kTwoPi / std::hypot(dc.delta_prime, Omega);
}

Operator rwa_hamiltonian(const DerivedCouplings& dc, double Omega, double phi) {
  // Built in the (|+>, |0>, |->) ordering, then mapped back to canonical.
  Operator h = Operator::Zero();
  h(1, 0) = std::polar(0.5 * Omega, phi);
  h(2, 0) = std::polar(0.5 * dc.delta_prime, dc.psi);
  h(0, 1) = std::conj(h(1, 0));
  h(0, 2) = std::conj(h(2, 0));
  return dressed::from_dressed(h);
}

Operator rwa_hamiltonian(const SystemParams& p, double Omega, double phi) {
  if (p.Pi[0] != 0.0 && p.d_perp != 0.0) {
    throw Error("rwa_hamiltonian: requires Pi_x = 0 (drive polarized perpendicular to the transverse field)");
  }
  return rwa_hamiltonian(derived_couplings(p, Omega), Omega, phi);
}

RwaValidation validate_rwa(const SystemParams& p, const DriveParams& d, double duration, int steps_per_period,
                           int checkpoints) {
  if (checkpoints < 1) checkpoints = 1;
  const DerivedCouplings dc = derived_couplings(p, d.Omega);
  const Operator h_rwa = rwa_hamiltonian(p, d.Omega, d.phi);

  const double period = kTwoPi / d.omega;
  const double segment = duration / checkpoints;
  const long steps = std::max<long>(1, std::lround(std::ceil(segment / period * steps_per_period)));

  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<StateVector> initial = {
      StateVector::basis(Level::kPlusOne),
      StateVector::basis(Level::kZero),
      StateVector::basis(Level::kMinusOne),
      dressed::plus(),
      dressed::minus(),
      StateVector(Complex(r, 0), Complex(0, r), 0.0),
      StateVector(0.5, Complex(0, r), -0.5),
  };

  auto h_lab = [&](double t) { return lab_hamiltonian(p, d, t); };
  // Fastest frequency: carrier plus the static spread.
  const double fastest = std::max(d.omega, p.D + std::abs(p.d_par * p.Pi[2])) + d.Omega + p.delta + dc.delta_prime;

  RwaValidation report;
  report.omega_ratio = d.Omega / d.omega;
  report.checkpoints = checkpoints;
  report.initial_states = static_cast<int>(initial.size());

  Propagator lab = Propagator::identity();
  for (int c = 1; c <= checkpoints; ++c) {
    const double t0 = segment * (c - 1);
    const double t1 = segment * c;
    lab = compose(evolve_time_dependent(h_lab, t0, t1, steps, fastest), lab);
    report.steps += steps;
    const Propagator rotated = rotating_frame_transform(lab, d.omega, 0.0, t1);
    const Propagator rwa = evolve_constant(h_rwa, t1);
    for (const auto& s : initial) {
      const double f = std::norm(overlap(geozero::apply(rwa.matrix, s), geozero::apply(rotated.matrix, s)));
      report.max_infidelity = std::max(report.max_infidelity, 1.0 - f);
    }
  }
  return report;
}

}  // namespace geozero
