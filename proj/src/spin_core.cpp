#include "geozero/spin_core.hpp"

#include <cmath>

#include "geozero/errors.hpp"

namespace geozero {

const SpinOperators& spin_operators() {
  static const SpinOperators ops = [] {
    const double r = 1.0 / std::sqrt(2.0);
    SpinOperators s;
    s.x << 0, r, 0,
           r, 0, r,
           0, r, 0;
    s.y << 0, -kI * r, 0,
           kI * r, 0, -kI * r,
           0, kI * r, 0;
    s.z = Operator::Zero();
    s.z(0, 0) = 1.0;
    s.z(2, 2) = -1.0;
    return s;
  }();
  return ops;
}

namespace dressed {

StateVector plus() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(r, 0.0, r);
}

StateVector minus() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(r, 0.0, -r);
}

StateVector phi_prime(double phi, double psi) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex e_psi = std::polar(r, psi);
  // e^{i psi}|-> spreads over |+1> and |-1> with weights +-1/sqrt2.
  return StateVector(e_psi * r, std::polar(r, phi), -e_psi * r);
}

StateVector phi_perp(double phi, double psi) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex e_psi = std::polar(r, psi);
  return StateVector(-e_psi * r, std::polar(r, phi), e_psi * r);
}

const Operator& basis_change() {
  static const Operator b = [] {
    Operator m;
    m.col(0) = plus().amplitudes();
    m.col(1) = StateVector::basis(Level::kZero).amplitudes();
    m.col(2) = minus().amplitudes();
    return m;
  }();
  return b;
}

Operator to_dressed(const Operator& m) { return basis_change().adjoint() * m * basis_change(); }

Operator from_dressed(const Operator& m) { return basis_change() * m * basis_change().adjoint(); }

}  // namespace dressed

StateVector apply(const Operator& u, const StateVector& s, bool checked) {
  if (checked && unitarity_error(u) > 1e-8) {
    throw NonUnitary("apply: operator deviates from unitarity by " + std::to_string(unitarity_error(u)));
  }
  return StateVector(u * s.amplitudes());
}

Complex overlap(const StateVector& a, const StateVector& b) {
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left operand
}

double unitarity_error(const Operator& u) {
  return (u.adjoint() * u - Operator::Identity()).cwiseAbs().maxCoeff();
}

double hermiticity_error(const Operator& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

double max_abs_diff(const Operator& a, const Operator& b) { return (a - b).cwiseAbs().maxCoeff(); }

double max_abs_diff_up_to_phase(const Operator& a, const Operator& b) {
  // Phase that best aligns b with a in the Frobenius sense.
  const Complex t = (b.adjoint() * a).trace();
  const Complex phase = std::abs(t) > 0 ? t / std::abs(t) : Complex{1.0, 0.0};
  return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace geozero
