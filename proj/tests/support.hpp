#pragma once
// Independent oracles shared by the unit tests.

#include <cmath>
#include <functional>
#include <random>

#include "geozero/spin_core.hpp"

namespace testing {

using geozero::Complex;
using geozero::Operator;

/// Classic RK4 on dU/dt = -i H(t) U. Deliberately unrelated to the
/// library's exponential integrators.
inline Operator rk4_propagator(const std::function<Operator(double)>& h, double t0, double t1, long steps) {
  const Complex mi(0.0, -1.0);
  const double dt = (t1 - t0) / steps;
  Operator u = Operator::Identity();
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    const Operator k1 = mi * h(t) * u;
    const Operator k2 = mi * h(t + 0.5 * dt) * (u + 0.5 * dt * k1);
    const Operator k3 = mi * h(t + 0.5 * dt) * (u + 0.5 * dt * k2);
    const Operator k4 = mi * h(t + dt) * (u + dt * k3);
    u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

/// Random Hermitian matrix with entries of order `scale`.
inline Operator random_hermitian(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g;
  Operator a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * scale * (a + a.adjoint());
}

inline geozero::StateVector random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return geozero::StateVector(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)), Complex(g(rng), g(rng))).normalized();
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace testing
