#include <doctest.h>

#include "geozero/errors.hpp"
#include "geozero/spin_core.hpp"
#include "support.hpp"

using namespace geozero;

TEST_CASE("spin-1 matrices obey the angular momentum algebra") {
  const auto& s = spin_operators();
  const Operator casimir = s.x * s.x + s.y * s.y + s.z * s.z;
  CHECK(testing::max_abs(casimir - 2.0 * Operator::Identity()) < 1e-14);
  CHECK(testing::max_abs(s.x * s.y - s.y * s.x - kI * s.z) < 1e-14);
  CHECK(testing::max_abs(s.y * s.z - s.z * s.y - kI * s.x) < 1e-14);
  CHECK(s.z(0, 0) == Complex(1.0));
  CHECK(s.z(2, 2) == Complex(-1.0));
  CHECK(hermiticity_error(s.x) == 0.0);
  CHECK(hermiticity_error(s.y) == 0.0);
}

TEST_CASE("dressed states") {
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(dressed::plus()[Level::kPlusOne] - r) < 1e-15);
  CHECK(std::abs(dressed::minus()[Level::kMinusOne] + r) < 1e-15);
  CHECK(std::abs(overlap(dressed::plus(), dressed::minus())) < 1e-15);

  SUBCASE("phi' and its dark partner span {|0>, |->}") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> a(-kPi, kPi);
    for (int k = 0; k < 100; ++k) {
      const double phi = a(rng), psi = a(rng);
      const auto b = dressed::phi_prime(phi, psi), d = dressed::phi_perp(phi, psi);
      CHECK(std::abs(overlap(b, d)) < 1e-15);
      CHECK(std::abs(b.norm() - 1.0) < 1e-15);
      CHECK(std::abs(overlap(dressed::plus(), b)) < 1e-15);
      // e^{i psi}|-> component
      CHECK(std::abs(overlap(dressed::minus(), b) - std::polar(r, psi)) < 1e-15);
    }
  }

  SUBCASE("basis change is unitary and invertible") {
    CHECK(unitarity_error(dressed::basis_change()) < 1e-15);
    std::mt19937_64 rng(2);
    const Operator m = testing::random_hermitian(rng, 1.0);
    CHECK(max_abs_diff(dressed::from_dressed(dressed::to_dressed(m)), m) < 1e-14);
    // Diagonal entries in the dressed frame are <+|M|+>, <0|M|0>, <-|M|->.
    const Operator d = dressed::to_dressed(m);
    CHECK(std::abs(d(0, 0) - overlap(dressed::plus(), geozero::apply(m, dressed::plus()))) < 1e-14);
    CHECK(std::abs(d(2, 2) - overlap(dressed::minus(), geozero::apply(m, dressed::minus()))) < 1e-14);
  }
}

TEST_CASE("checked apply rejects non-unitary operators") {
  Operator m = Operator::Identity();
  m(0, 0) = 1.1;
  const auto s = StateVector::basis(Level::kZero);
  CHECK_NOTHROW(geozero::apply(m, s));
  CHECK_THROWS_AS(geozero::apply(m, s, true), NonUnitary);
  CHECK_NOTHROW(geozero::apply(Operator::Identity(), s, true));
}

TEST_CASE("phase-insensitive comparison") {
  std::mt19937_64 rng(3);
  const Operator m = testing::random_hermitian(rng, 1.0);
  const Operator shifted = std::polar(1.0, 0.7) * m;
  CHECK(max_abs_diff(m, shifted) > 0.1);
  CHECK(max_abs_diff_up_to_phase(m, shifted) < 1e-14);
}
