#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "geozero/errors.hpp"
#include "geozero/hamiltonian.hpp"
#include "support.hpp"

using namespace geozero;

namespace {

// Spin-1 matrices written out by hand, independent of spin_operators().
Operator sx() {
  const double r = 1.0 / std::sqrt(2.0);
  Operator m = Operator::Zero();
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = r;
  return m;
}
Operator sy() {
  const double r = 1.0 / std::sqrt(2.0);
  Operator m = Operator::Zero();
  m(0, 1) = m(1, 2) = Complex(0, -r);
  m(1, 0) = m(2, 1) = Complex(0, r);
  return m;
}
Operator sz() {
  Operator m = Operator::Zero();
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

Operator outer(const StateVector& a, const StateVector& b) { return a.amplitudes() * b.amplitudes().adjoint(); }

}  // namespace

TEST_CASE("lab Hamiltonian") {
  SUBCASE("bare zero-field splitting") {
    SystemParams p;
    p.delta = 0.0;
    const Operator h = lab_hamiltonian(p, {0.0, 1.0, 0.0}, 0.3);
    Operator want = Operator::Zero();
    want(0, 0) = want(2, 2) = p.D;
    CHECK(testing::max_abs(h - want) < 1e-3);
    CHECK(testing::max_abs(h * sz() - sz() * h) < 1e-14 * p.D);
  }
  SUBCASE("drive term isolated") {
    SystemParams p;
    p.D = 1e-300;  // effectively zero but valid
    p.delta = 0.0;
    const DriveParams d{2.0, 5.0, -1.0};
    const Operator h = lab_hamiltonian(p, d, 0.2);  // omega t + phi = 0
    CHECK(testing::max_abs(h - 2.0 * sx()) < 1e-14);
  }
  SUBCASE("term-by-term reconstruction") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int k = 0; k < 50; ++k) {
      SystemParams p;
      p.D = u(rng) * 100;
      p.d_par = u(rng);
      p.d_perp = u(rng);
      p.Pi = {u(rng), u(rng), u(rng)};
      p.Delta = u(rng);
      p.delta = u(rng);
      const DriveParams d{u(rng), u(rng) * 50, u(rng)};
      const double t = u(rng);
      const Operator want = (p.D + p.d_par * p.Pi[2]) * sz() * sz() + (p.Delta + 0.5 * p.delta) * sz() +
                            d.Omega * std::cos(d.omega * t + d.phi) * sx() +
                            p.d_perp * (p.Pi[0] * (sy() * sy() - sx() * sx()) + p.Pi[1] * (sx() * sy() + sy() * sx()));
      const Operator h = lab_hamiltonian(p, d, t);
      CHECK(testing::max_abs(h - want) < 1e-12);
      CHECK(hermiticity_error(h) < 1e-12);
    }
  }
}

TEST_CASE("derived couplings") {
  SystemParams p;
  p.delta = units::mhz(3.0);
  auto dc = derived_couplings(p, 0.0);
  CHECK(dc.delta_prime == doctest::Approx(units::mhz(3.0)));
  CHECK(dc.psi == 0.0);

  p.delta = units::mhz(3.04);
  dc = matched_couplings(p);
  CHECK(dc.T_prime * 1e9 == doctest::Approx(232.6009).epsilon(1e-6));
  CHECK(dc.T_prime * dc.delta_prime == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-15));
  CHECK(dc.omega_bar == doctest::Approx(std::sqrt(2.0) * dc.delta_prime));
  CHECK(dc.T_prime * dc.omega_bar == doctest::Approx(kTwoPi));
  CHECK(two_pi_duration(dc, dc.delta_prime) == doctest::Approx(dc.T_prime));

  SUBCASE("pure transverse splitting") {
    SystemParams q;
    q.delta = 0.0;
    q.d_perp = 1.0;
    q.Pi = {0.0, units::mhz(1.5), 0.0};
    const auto c = derived_couplings(q, 0.0);
    CHECK(c.delta_prime == doctest::Approx(units::mhz(3.0)));
    CHECK(c.psi == doctest::Approx(-kPi / 2));
  }
  SUBCASE("delta' grows with |Pi_y|") {
    double last = 0.0;
    for (double y : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      SystemParams q;
      q.d_perp = units::mhz(1.0);
      q.Pi[1] = -y;
      const double dp = derived_couplings(q, 0.0).delta_prime;
      CHECK(dp >= last);
      CHECK(dp >= q.delta);
      last = dp;
    }
  }
  SUBCASE("degenerate splitting") {
    SystemParams q;
    q.delta = 0.0;
    CHECK_THROWS_AS(derived_couplings(q, 1.0), DegenerateSplitting);
  }
  SUBCASE("resonance") {
    SystemParams q;
    q.d_par = 2.0;
    q.Pi[2] = 3.0;
    CHECK(derived_couplings(q, 0.0).omega_res == q.D + 6.0);
  }
}

TEST_CASE("parameter validation") {
  SystemParams p;
  CHECK_NOTHROW(p.validate());
  p.D = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.delta = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.Delta = 0.2 * p.delta;
  CHECK_THROWS_AS(p.require_zero_field(), Error);
  p.Delta = 0.05 * p.delta;
  CHECK_NOTHROW(p.require_zero_field());
  p = {};
  p.d_perp = 1.0;
  p.Pi[0] = 1.0;
  CHECK_THROWS_AS(rwa_hamiltonian(p, 1.0, 0.0), Error);
}

TEST_CASE("rotating-frame Hamiltonian") {
  const SystemParams p;
  const DerivedCouplings dc = matched_couplings(p);

  SUBCASE("matched drive is the bright-state coupling") {
    for (double phi : {0.0, 0.4, -2.0, kPi}) {
      const Operator h = rwa_hamiltonian(p, dc.delta_prime, phi);
      const auto bright = dressed::phi_prime(phi, dc.psi);
      const auto plus = dressed::plus();
      const Operator want = dc.delta_prime / std::sqrt(2.0) * (outer(bright, plus) + outer(plus, bright));
      CHECK(testing::max_abs(h - want) < 1e-12 * dc.delta_prime);
    }
  }
  SUBCASE("free evolution limit") {
    const Operator h = rwa_hamiltonian(p, 0.0, 0.0);
    Eigen::SelfAdjointEigenSolver<Operator> es(h);
    const auto ev = es.eigenvalues();
    CHECK(ev(0) == doctest::Approx(-dc.delta_prime / 2));
    CHECK(std::abs(ev(1)) < 1e-9);
    CHECK(ev(2) == doctest::Approx(dc.delta_prime / 2));
    // With psi = 0 the free part is (delta'/2) Sz in the bare basis.
    CHECK(testing::max_abs(h - 0.5 * dc.delta_prime * sz()) < 1e-12 * dc.delta_prime);
  }
  SUBCASE("always has a dark state") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int k = 0; k < 100; ++k) {
      const double Omega = u(rng) * dc.delta_prime;
      const Operator h = rwa_hamiltonian(p, Omega, 2.0 * u(rng));
      CHECK(std::abs(h.determinant()) < 1e-10 * std::pow(dc.delta_prime, 3));
      CHECK(hermiticity_error(h) < 1e-12 * dc.delta_prime);
    }
  }
}

TEST_CASE("RWA validation against the lab frame") {
  // Scaled problem: carrier only a few hundred times the couplings so the
  // lab-frame integration stays cheap.
  SystemParams p;
  const DerivedCouplings matched = matched_couplings(p);
  p.D = 300.0 * matched.delta_prime;

  SUBCASE("no drive") {
    const auto v = validate_rwa(p, {0.0, p.resonance(), 0.0}, matched.T_prime, 1000, 2);
    CHECK(v.max_infidelity < 1e-10);
  }
  SUBCASE("weak drive agrees") {
    const auto v = validate_rwa(p, {matched.delta_prime, p.resonance(), 0.3}, matched.T_prime, 1000, 2);
    CHECK(v.omega_ratio == doctest::Approx(1.0 / 300.0));
    CHECK(v.max_infidelity < 1e-3);
  }
  SUBCASE("strong drive breaks the approximation") {
    SystemParams q;
    q.D = 10.0 * matched.delta_prime;
    const auto v = validate_rwa(q, {matched.delta_prime, q.resonance(), 0.0}, matched.T_prime, 1000, 4);
    CHECK(v.omega_ratio == doctest::Approx(0.1));
    CHECK(v.max_infidelity > 1e-3);
  }
}
