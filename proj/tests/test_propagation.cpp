#include <doctest.h>

#include <atomic>

#include "geozero/errors.hpp"
#include "geozero/hamiltonian.hpp"
#include "geozero/propagation.hpp"
#include "support.hpp"

using namespace geozero;

TEST_CASE("constant Hamiltonian exponential matches RK4") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const Operator h = testing::random_hermitian(rng, 2.0);
    const double dt = 1.3;
    const Propagator u = evolve_constant(h, dt);
    const Operator ref = testing::rk4_propagator([&](double) { return h; }, 0.0, dt, 4000);
    CHECK(testing::max_abs(u.matrix - ref) < 1e-10);
    CHECK(unitarity_error(u.matrix) < 1e-13);
    CHECK(u.duration == dt);
    // Short-step path.
    CHECK(testing::max_abs(unitary_step(h, 1e-4) - evolve_constant(h, 1e-4).matrix) < 1e-14);
  }
}

TEST_CASE("time-dependent integration") {
  // Resonant spin-1 drive in a small-number problem: fast enough to need
  // real stepping, slow enough for RK4 to serve as the reference.
  SystemParams p;
  p.D = 40.0;
  p.delta = 1.0;
  const DriveParams d{2.0, p.D, 0.3};
  auto h = [&](double t) { return lab_hamiltonian(p, d, t); };
  const double t1 = 3.0;

  const Operator ref = testing::rk4_propagator(h, 0.0, t1, 200000);
  const Propagator u = evolve_time_dependent(h, 0.0, t1, 40000);
  CHECK(testing::max_abs(u.matrix - ref) < 1e-5);
  CHECK(unitarity_error(u.matrix) < 1e-10);  // rounding over 4e4 products

  SUBCASE("second order by step doubling") {
    const double order = step_doubling_order(h, 0.0, t1, 4000);
    CHECK(order == doctest::Approx(2.0).epsilon(0.02));
  }
  SUBCASE("refuses steps that undersample the Hamiltonian") {
    CHECK_THROWS_AS(evolve_time_dependent(h, 0.0, t1, 10), StepTooCoarse);
  }
  SUBCASE("splitting the interval composes") {
    const Propagator a = evolve_time_dependent(h, 0.0, 1.0, 20000);
    const Propagator b = evolve_time_dependent(h, 1.0, t1, 40000);
    const Propagator ab = compose(b, a);
    CHECK(ab.duration == doctest::Approx(t1));
    CHECK(testing::max_abs(ab.matrix - ref) < 1e-5);
  }
}

TEST_CASE("rotating-frame transform") {
  std::mt19937_64 rng(3);
  const Operator m = testing::random_hermitian(rng, 1.0);
  const Propagator lab = evolve_constant(m, 0.7);
  const double w = 5.0, t0 = 0.2, t1 = 0.9;
  const Propagator rot = rotating_frame_transform(lab, w, t0, t1);
  const auto v = [&](double t) {
    Operator out = Operator::Identity();
    out(0, 0) = std::polar(1.0, w * t);
    out(2, 2) = std::polar(1.0, w * t);
    return out;
  };
  CHECK(testing::max_abs(rot.matrix - v(t1) * lab.matrix * v(t0).adjoint()) < 1e-14);
}

TEST_CASE("parallel helpers keep input order") {
  std::vector<int> in(1000);
  for (int i = 0; i < 1000; ++i) in[i] = i;
  for (unsigned threads : {1u, 3u, 8u}) {
    const auto out = evolve_batch(in, [](int x) { return x * x; }, threads);
    REQUIRE(out.size() == in.size());
    bool ordered = true;
    for (int i = 0; i < 1000; ++i) ordered = ordered && out[i] == i * i;
    CHECK(ordered);
  }
  std::atomic<int> count{0};
  parallel_for(257, [&](std::size_t) { ++count; }, 4);
  CHECK(count == 257);
}
