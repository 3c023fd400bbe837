#pragma once

// Fixed-dimension linear algebra for the spin-1 triplet.
//
// Every vector and matrix in the library is expressed in the canonical
// ordering (|+1>, |0>, |-1>). Hamiltonians carry rad/s, propagators are
// dimensionless.

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace geozero {

using Complex = std::complex<double>;
using Operator = Eigen::Matrix3cd;
using Amplitudes = Eigen::Vector3cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Index of each spin projection in the canonical basis.
enum class Level : int { kPlusOne = 0, kZero = 1, kMinusOne = 2 };

constexpr int index(Level l) { return static_cast<int>(l); }

class StateVector {
 public:
  StateVector() : amps_(Amplitudes::Zero()) {}
  explicit StateVector(const Amplitudes& amps) : amps_(amps) {}
  StateVector(Complex plus_one, Complex zero, Complex minus_one) : amps_(plus_one, zero, minus_one) {}

  static StateVector basis(Level l) {
    StateVector s;
    s.amps_(index(l)) = 1.0;
    return s;
  }

  const Amplitudes& amplitudes() const { return amps_; }
  Complex operator[](Level l) const { return amps_(index(l)); }

  double norm() const { return amps_.norm(); }
  StateVector normalized() const { return StateVector(amps_ / amps_.norm()); }

  /// |<l|s>|^2
  double population(Level l) const { return std::norm(amps_(index(l))); }

  friend StateVector operator*(Complex c, const StateVector& s) { return StateVector(c * s.amps_); }

 private:
  Amplitudes amps_;
};

struct SpinOperators {
  Operator x;
  Operator y;
  Operator z;
};

/// Standard spin-1 matrices with Sz = diag(+1, 0, -1).
const SpinOperators& spin_operators();

// Dressed states used by the geometric control protocol.
namespace dressed {

/// (|+1> + |-1>)/sqrt2
StateVector plus();
/// (|+1> - |-1>)/sqrt2
StateVector minus();
/// (e^{i phi}|0> + e^{i psi}|->)/sqrt2
StateVector phi_prime(double phi, double psi);
/// (e^{i phi}|0> - e^{i psi}|->)/sqrt2, the dark state of the phi-driven coupling.
StateVector phi_perp(double phi, double psi);

/// Unitary whose columns are |+>, |0>, |-> in canonical coordinates.
/// `to_dressed(M) = B^dagger M B` rewrites an operator in the (|+>, |0>, |->) ordering.
const Operator& basis_change();
Operator to_dressed(const Operator& m);
Operator from_dressed(const Operator& m);

}  // namespace dressed

/// U*s. In checked mode a U deviating from unitarity by more than 1e-8 is rejected.
StateVector apply(const Operator& u, const StateVector& s, bool checked = false);

/// <a|b>
Complex overlap(const StateVector& a, const StateVector& b);

/// max |(U^dagger U - I)_ij|
double unitarity_error(const Operator& u);
/// max |(H - H^dagger)_ij|
double hermiticity_error(const Operator& h);

/// Max-abs entrywise distance, optionally after removing the best global phase from `b`.
double max_abs_diff(const Operator& a, const Operator& b);
double max_abs_diff_up_to_phase(const Operator& a, const Operator& b);

}  // namespace geozero
