#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "geozero/spin_core.hpp"

namespace geozero {

struct Propagator {
  Operator matrix = Operator::Identity();
  double duration = 0.0;  // s

  static Propagator identity() { return {}; }
};

/// `later` applied after `earlier`: matrix later*earlier, durations add.
Propagator compose(const Propagator& later, const Propagator& earlier);

/// exp(-i H dt) for Hermitian H via eigendecomposition.
Propagator evolve_constant(const Operator& h, double dt);

/// exp(-i H dt) without the duration bookkeeping. Short steps take a
/// truncated Taylor series that is exact to double precision.
Operator unitary_step(const Operator& h, double dt);

using TimeDependentHamiltonian = std::function<Operator(double)>;

/// Midpoint-exponential (second-order Magnus) product integration on a
/// uniform grid. `max_frequency` bounds the fastest angular frequency in H;
/// when omitted it is estimated from the traceless part of H at a few
/// sample times. Throws StepTooCoarse if max_frequency*(t1-t0)/steps >= 0.1.
Propagator evolve_time_dependent(const TimeDependentHamiltonian& h, double t0, double t1, long steps,
                                 std::optional<double> max_frequency = std::nullopt);

/// Observed convergence order of evolve_time_dependent by step doubling:
/// log2(|U_n - U_2n| / |U_2n - U_4n|) in the max-abs norm.
double step_doubling_order(const TimeDependentHamiltonian& h, double t0, double t1, long steps,
                           std::optional<double> max_frequency = std::nullopt);

/// U_rot = V(t1) U_lab V(t0)^dagger with V(t) = exp(i omega t Sz^2), for a
/// lab propagator running from t0 to t1.
Propagator rotating_frame_transform(const Propagator& lab, double omega, double t0, double t1);

/// Maps `fn` over independent inputs on `threads` workers; output order
/// matches input order regardless of scheduling.
template <typename In, typename Fn>
auto evolve_batch(const std::vector<In>& inputs, Fn&& fn, unsigned threads = 0)
    -> std::vector<decltype(fn(inputs.front()))>;

/// Runs body(i) for i in [0, count) on `threads` workers (0 picks the hardware count).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

template <typename In, typename Fn>
auto evolve_batch(const std::vector<In>& inputs, Fn&& fn, unsigned threads)
    -> std::vector<decltype(fn(inputs.front()))> {
  std::vector<decltype(fn(inputs.front()))> out(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) { out[i] = fn(inputs[i]); }, threads);
  return out;
}

}  // namespace geozero
