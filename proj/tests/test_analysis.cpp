#include <doctest.h>

#include <algorithm>
#include <random>

#include "geozero/analysis.hpp"
#include "geozero/errors.hpp"
#include "geozero/sequences.hpp"

using namespace geozero;

namespace {

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

// |int y e^{iws} ds| for ZDD-N with y = 0 inside the composites, built from
// the block layout by hand: sign changes at (k + 1/2) t, composites of length
// 2T' centred there.
double zdd_transform(int N, double t, double Tp, double w) {
  std::complex<double> acc = 0.0;
  auto piece = [&](double a, double b, double sign) {
    acc += sign * (std::polar(1.0, w * b) - std::polar(1.0, w * a)) / std::complex<double>(0.0, w);
  };
  double sign = 1.0, start = 0.0;
  for (int k = 0; k < N; ++k) {
    const double mid = (k + 0.5) * t;
    piece(start, mid - Tp, sign);
    start = mid + Tp;
    sign = -sign;
  }
  piece(start, N * t, sign);
  return std::abs(acc);
}

}  // namespace

TEST_CASE("stretched exponential fit") {
  const auto t = grid(1e-6, 300e-6, 40);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.005);
  for (double p : {1.0, 1.8, 3.0}) {
    std::vector<double> c;
    for (double x : t) c.push_back(std::exp(-std::pow(x / 120e-6, p)) + noise(rng));
    FitOptions opt;
    opt.bootstrap = 30;
    const DecayFit fit = fit_stretched_exponential(t, c, DecayModel::kStretchedExponential, opt);
    CHECK(fit.T.value == doctest::Approx(120e-6).epsilon(0.03));
    CHECK(fit.p.value == doctest::Approx(p).epsilon(0.06));
    CHECK(fit.T.sigma > 0.0);
    CHECK(fit.T.sigma < 5e-6);
    CHECK(fit.rms_residual == doctest::Approx(0.005).epsilon(0.3));
    CHECK(fit.evaluate(0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("damped cosine fit") {
  const auto t = grid(0.0, 20e-6, 200);
  const double w = kTwoPi * 0.6e6;
  std::vector<double> c;
  for (double x : t) c.push_back(std::exp(-std::pow(x / 8e-6, 2.0)) * std::cos(w * x));
  const DecayFit fit = fit_stretched_exponential(t, c, DecayModel::kDampedCosine, {0, 1});
  CHECK(fit.T.value == doctest::Approx(8e-6).epsilon(1e-4));
  CHECK(fit.p.value == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(fit.omega.value == doctest::Approx(w).epsilon(1e-5));
}

TEST_CASE("fit failures") {
  const auto t = grid(1e-6, 10e-6, 10);
  CHECK_THROWS_AS(fit_stretched_exponential(t, std::vector<double>(10, -0.5), DecayModel::kStretchedExponential),
                  FitDiverged);
  CHECK_THROWS(fit_stretched_exponential(t, std::vector<double>(3, 0.5), DecayModel::kStretchedExponential));
}

TEST_CASE("spectra") {
  const auto t = grid(0.0, 99e-6, 100);  // 1 us step, 10 kHz resolution
  std::vector<double> y;
  for (double x : t) y.push_back(0.3 + std::cos(kTwoPi * 123.4e3 * x + 0.4));

  const Spectrum s = dft(t, y);
  CHECK(s.frequency.front() == 0.0);
  CHECK(s.frequency.back() == doctest::Approx(0.5e6).epsilon(0.011));
  CHECK(s.magnitude.front() == doctest::Approx(30.0).epsilon(0.05));
  CHECK(dominant_frequency(t, y) == doctest::Approx(123.4e3).epsilon(0.02));

  const SinusoidFit fit = fit_sinusoid(t, y);
  CHECK(fit.frequency == doctest::Approx(123.4e3).epsilon(1e-8));
  CHECK(fit.amplitude == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.offset == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(fit.phase == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(fit.rms_residual < 1e-8);

  auto bent = t;
  bent[50] += 0.1e-6;
  CHECK_THROWS_AS(dft(bent, y), NonuniformSpacing);
}

TEST_CASE("AC dip fit on synthetic data") {
  const DerivedCouplings dc = matched_couplings(SystemParams{});
  const int N = 32;
  const double B = 40e-9, f = 0.5e6;
  const double coupling = 2.0 * units::kGammaElectron * std::sqrt(2.0);
  ExperimentResult r;
  r.sweep = grid(950e-9, 1050e-9, 41);
  for (double t : r.sweep) {
    const double c = std::cyl_bessel_j(0.0, coupling * B * zdd_transform(N, t, dc.T_prime, kTwoPi * f));
    r.p0.push_back(0.5 * (1.0 + c));
    r.stderr_p0.push_back(1e-3);
  }
  AcDipOptions opt;
  opt.bootstrap = 0;
  const AcDipFit fit = fit_ac_dip(r, dc, N, opt);
  CHECK(fit.B_rms.value == doctest::Approx(B).epsilon(1e-4));
  CHECK(fit.frequency.value == doctest::Approx(f).epsilon(1e-6));
  CHECK(fit.t_s == doctest::Approx(1.0 / (2.0 * f)).epsilon(2e-3));
  CHECK(fit.f_prime == doctest::Approx(1.0 / (2.0 * fit.t_s)));
  const auto c = r.coherence();
  CHECK(fit.min_coherence <= *std::min_element(c.begin(), c.end()) + 1e-9);
  CHECK(fit.min_coherence < 0.99);

  SUBCASE("flat data") {
    ExperimentResult flat = r;
    std::fill(flat.p0.begin(), flat.p0.end(), 0.9999);
    CHECK_THROWS_AS(fit_ac_dip(flat, dc, N, opt), NoDipFound);
  }
}

TEST_CASE("Nelder-Mead on Rosenbrock") {
  double best = 1.0;
  const auto x = nelder_mead(
      [](const std::vector<double>& v) { return std::pow(1.0 - v[0], 2) + 100.0 * std::pow(v[1] - v[0] * v[0], 2); },
      {-1.2, 1.0}, {0.5, 0.5}, &best, 20000);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(best < 1e-10);
}
