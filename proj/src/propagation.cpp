#include "geozero/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "geozero/errors.hpp"

namespace geozero {

namespace {

// Below this value of ||H dt|| the Taylor series is used.
constexpr double kTaylorThreshold = 0.125;
constexpr int kTaylorOrder = 12;

Operator taylor_exp(const Operator& generator) {
  // sum_k A^k / k!, A = -i H dt, truncated; remainder < 0.125^13/13! ~ 1e-21.
  Operator result = Operator::Identity();
  Operator term = Operator::Identity();
  for (int k = 1; k <= kTaylorOrder; ++k) {
    term = (term * generator) / static_cast<double>(k);
    result += term;
  }
  return result;
}

Operator eigen_exp(const Operator& h, double dt) {
  const Eigen::SelfAdjointEigenSolver<Operator> solver(h);
  const Eigen::Vector3d& w = solver.eigenvalues();
  const Operator& v = solver.eigenvectors();
  Eigen::Vector3cd phases;
  for (int k = 0; k < 3; ++k) phases(k) = std::polar(1.0, -w(k) * dt);
  return v * phases.asDiagonal() * v.adjoint();
}

double traceless_norm(const Operator& h) {
  const Complex mean = h.trace() / 3.0;
  return (h - mean * Operator::Identity()).norm();
}

}  // namespace

Propagator compose(const Propagator& later, const Propagator& earlier) {
  return {later.matrix * earlier.matrix, later.duration + earlier.duration};
}

Operator unitary_step(const Operator& h, double dt) {
  if (dt == 0.0) return Operator::Identity();
  // Global phase from the trace is split off so the Taylor branch only sees the spread.
  const Complex mean = h.trace() / 3.0;
  const Operator spread = h - mean * Operator::Identity();
  const Complex global = std::exp(-kI * mean * dt);
  if (spread.norm() * std::abs(dt) < kTaylorThreshold) {
    return global * taylor_exp(-kI * dt * spread);
  }
  return eigen_exp(h, dt);
}

Propagator evolve_constant(const Operator& h, double dt) {
  if (dt == 0.0) return {Operator::Identity(), 0.0};
  return {eigen_exp(h, dt), dt};
}

Propagator evolve_time_dependent(const TimeDependentHamiltonian& h, double t0, double t1, long steps,
                                 std::optional<double> max_frequency) {
  if (steps < 1) throw StepTooCoarse("evolve_time_dependent: steps must be positive");
  const double span = t1 - t0;
  double fastest = 0.0;
  if (max_frequency) {
    fastest = *max_frequency;
  } else {
    for (int k = 0; k <= 4; ++k) fastest = std::max(fastest, traceless_norm(h(t0 + span * k / 4.0)));
  }
  const double per_step = fastest * std::abs(span) / static_cast<double>(steps);
  if (per_step >= 0.1) {
    throw StepTooCoarse("evolve_time_dependent: " + std::to_string(per_step) +
                        " rad per step exceeds 0.1; increase steps");
  }
  const double dt = span / static_cast<double>(steps);
  Operator u = Operator::Identity();
  for (long k = 0; k < steps; ++k) {
    const double mid = t0 + (static_cast<double>(k) + 0.5) * dt;
    u = unitary_step(h(mid), dt) * u;
  }
  return {u, span};
}

double step_doubling_order(const TimeDependentHamiltonian& h, double t0, double t1, long steps,
                           std::optional<double> max_frequency) {
  const Operator u1 = evolve_time_dependent(h, t0, t1, steps, max_frequency).matrix;
  const Operator u2 = evolve_time_dependent(h, t0, t1, 2 * steps, max_frequency).matrix;
  const Operator u4 = evolve_time_dependent(h, t0, t1, 4 * steps, max_frequency).matrix;
  return std::log2(max_abs_diff(u1, u2) / max_abs_diff(u2, u4));
}

Propagator rotating_frame_transform(const Propagator& lab, double omega, double t0, double t1) {
  // V(t) = exp(i omega t Sz^2) = diag(e^{i omega t}, 1, e^{i omega t}).
  auto frame = [omega](double t) {
    Eigen::Vector3cd d(std::polar(1.0, omega * t), 1.0, std::polar(1.0, omega * t));
    return d;
  };
  const Eigen::Vector3cd left = frame(t1);
  const Eigen::Vector3cd right = frame(t0).conjugate();
  Operator m = left.asDiagonal() * lab.matrix * right.asDiagonal();
  return {m, lab.duration};
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace geozero
