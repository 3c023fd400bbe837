#include <doctest.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include <random>
#include <sstream>

#include "geozero/errors.hpp"
#include "geozero/filter_analysis.hpp"
#include "support.hpp"

using namespace geozero;

namespace {

const DerivedCouplings& couplings() {
  static const DerivedCouplings dc = matched_couplings(SystemParams{});
  return dc;
}

// |int y e^{iwt}|^2 / T^2 by adaptive quadrature on each constant piece.
double quadrature_filter(const ModulationFunction& y, double w) {
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
  struct Ctx {
    double w;
    bool imag;
  };
  auto trig = [](double t, void* p) {
    const auto* c = static_cast<Ctx*>(p);
    return c->imag ? std::sin(c->w * t) : std::cos(c->w * t);
  };
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < y.values.size(); ++k) {
    for (bool imag : {false, true}) {
      Ctx ctx{w, imag};
      gsl_function f{+trig, &ctx};
      double v = 0.0, err = 0.0;
      gsl_integration_qag(&f, y.breakpoints[k], y.breakpoints[k + 1], 1e-14, 1e-12, 200, GSL_INTEG_GAUSS61, ws, &v,
                          &err);
      (imag ? im : re) += y.values[k] * v;
    }
  }
  gsl_integration_workspace_free(ws);
  const double T = y.duration();
  return (re * re + im * im) / (T * T);
}

double coherence_of(const SequenceSpec& seq, const ACSignal& s, double theta0) {
  LongitudinalField field;
  field.signal = s.realize(theta0);
  AnalyticOptions opt;
  opt.field = &field;
  const Propagator u = compile_analytic(seq, couplings(), opt);
  const StateVector out = geozero::apply(u.matrix, StateVector::basis(Level::kZero));
  return 2.0 * out.population(Level::kZero) - 1.0;
}

}  // namespace

TEST_CASE("ZDD modulation shapes") {
  const double t = 1e-6, Tp = couplings().T_prime;
  SUBCASE("ZDD-2 instantaneous") {
    const auto y = modulation_function(build_zdd(couplings(), 2, t), PulseConvention::kInstantaneous);
    CHECK(y.duration() == doctest::Approx(2.0 * t));
    const double first = y.value(0.25 * t);
    CHECK(std::abs(first) == 1.0);
    CHECK(y.value(0.49 * t) == first);
    CHECK(y.value(0.51 * t) == -first);
    CHECK(y.value(1.49 * t) == -first);
    CHECK(y.value(1.51 * t) == first);
    // Inside the composite the instantaneous picture keeps the sign.
    CHECK(y.value(0.5 * t - 0.9 * Tp) == first);
  }
  SUBCASE("ZDD-2 with zero during pulses") {
    const auto y = modulation_function(build_zdd(couplings(), 2, t), PulseConvention::kZeroDuringPulse);
    const double first = y.value(0.1 * t);
    CHECK(y.value(0.5 * t - 0.99 * Tp) == 0.0);
    CHECK(y.value(0.5 * t + 0.99 * Tp) == 0.0);
    CHECK(y.value(0.5 * t + 1.01 * Tp) == -first);
    CHECK(y.value(1.5 * t) == 0.0);
  }
  SUBCASE("ZDD-16 flips once per interval") {
    const auto y = modulation_function(build_zdd(couplings(), 16, t), PulseConvention::kInstantaneous);
    CHECK(y.duration() == doctest::Approx(16.0 * t));
    int flips = 0;
    for (int k = 0; k < 16 * 100; ++k) {
      const double a = y.value((k + 0.5) * t / 100), b = y.value((k + 1.5) * t / 100);
      if (k + 1 < 16 * 100 && a != b) ++flips;
    }
    CHECK(flips == 16);
    // Flips sit at the composite midpoints (k + 1/2) t.
    for (int k = 0; k < 16; ++k) CHECK(y.value((k + 0.5) * t - 1e-12) == -y.value((k + 0.5) * t + 1e-12));
  }
  SUBCASE("non-DD sequences are rejected") {
    CHECK_THROWS_AS(modulation_function(build_plain_train(couplings(), 4, t), PulseConvention::kInstantaneous),
                    NotADDSequence);
  }
}

TEST_CASE("filter function against quadrature") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> level(-1, 1), pieces(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    ModulationFunction y;
    y.breakpoints = {0.0};
    const int n = pieces(rng);
    for (int k = 0; k < n; ++k) {
      y.breakpoints.push_back(y.breakpoints.back() + 1e-7 + 1e-6 * u(rng));
      y.values.push_back(level(rng));
    }
    const double w = kTwoPi * 3e6 * u(rng);
    CHECK(filter_function(y, w) == doctest::Approx(quadrature_filter(y, w)).epsilon(1e-9).scale(1e-12));

    // Reversing y in time only conjugates the transform up to a phase.
    ModulationFunction rev;
    rev.breakpoints = {0.0};
    for (int k = n - 1; k >= 0; --k) {
      rev.breakpoints.push_back(rev.breakpoints.back() + y.breakpoints[k + 1] - y.breakpoints[k]);
      rev.values.push_back(y.values[k]);
    }
    CHECK(filter_function(rev, w) == doctest::Approx(filter_function(y, w)).epsilon(1e-10).scale(1e-12));
  }
}

TEST_CASE("filter function limits") {
  const auto ramsey = modulation_function(build_ramsey(couplings(), 2e-6), PulseConvention::kInstantaneous);
  CHECK(filter_function(ramsey, 0.0) == doctest::Approx(1.0));

  const auto zdd = modulation_function(build_zdd(couplings(), 8, 1e-6), PulseConvention::kInstantaneous);
  CHECK(filter_function(zdd, 1e-3) < 1e-12);

  // A long square wave concentrates (2/pi)^2 of the weight at its fundamental.
  const double t = 1e-6;
  const auto long_zdd = modulation_function(build_zdd(couplings(), 64, t), PulseConvention::kInstantaneous);
  double peak = 0.0;
  for (int k = -50; k <= 50; ++k) peak = std::max(peak, filter_function(long_zdd, kPi / t * (1.0 + k * 1e-4)));
  CHECK(peak == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-3));
}

TEST_CASE("DQ phase accumulation") {
  const double t = 1e-6;
  const SequenceSpec seq = build_zdd(couplings(), 8, t);
  ACSignal s;
  s.frequency = 1.0 / (2.0 * t);
  s.B_rms = 5e-9;

  SUBCASE("matches the propagator for free-time pickup") {
    for (double theta : {0.0, 0.7, 2.1, 4.0}) {
      const double phase = dq_phase_accumulation(seq, s, theta);
      CHECK(std::abs(phase) < kPi);
      CHECK(std::acos(coherence_of(seq, s, theta)) == doctest::Approx(std::abs(phase)).epsilon(1e-6).scale(1e-6));
    }
  }
  SUBCASE("resonant amplitude in the instantaneous picture") {
    const double a = dq_phase_accumulation(seq, s, 0.0, PulseConvention::kInstantaneous);
    const double b = dq_phase_accumulation(seq, s, kPi / 2, PulseConvention::kInstantaneous);
    const double want = 2.0 * s.gamma_e * std::sqrt(2.0) * s.B_rms * (2.0 / kPi) * 8.0 * t;
    CHECK(std::hypot(a, b) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("inverse J0") {
  for (double c = 0.999; c > 0.0; c -= 0.037) CHECK(gsl_sf_bessel_J0(inverse_j0(c)) == doctest::Approx(c).epsilon(1e-10));
  CHECK(inverse_j0(1.0) == 0.0);
  CHECK(inverse_j0(1.3) == 0.0);
}

TEST_CASE("simulated filter function") {
  const double t = 1e-6;
  SystemParams p;
  p.delta *= 100.0;  // pulses of a few ns: close to the instantaneous limit
  const DerivedCouplings dc = matched_couplings(p);
  const SequenceSpec seq = build_zdd(dc, 16, t);
  const auto ideal = modulation_function(seq, PulseConvention::kInstantaneous);
  FfProbeOptions opt;
  opt.threads = 1;
  const double on = kPi / t;
  CHECK(measure_ff_via_simulation(seq, on, dc, ReadoutModel::ideal(), opt) ==
        doctest::Approx(filter_function(ideal, on)).epsilon(0.02));
  const double off = kTwoPi * 0.31e6;
  CHECK(std::abs(measure_ff_via_simulation(seq, off, dc, ReadoutModel::ideal(), opt) - filter_function(ideal, off)) <
        0.02);

  opt.probe_phase = 0.5;
  CHECK_THROWS_AS(measure_ff_via_simulation(seq, on, dc, ReadoutModel::ideal(), opt), SignalTooStrong);
}

TEST_CASE("duty-cycle deviation grows with the pulse fraction") {
  const double t = 1e-6;
  std::vector<double> grid;
  for (int k = 0; k < 9; ++k) grid.push_back(kTwoPi * (0.3e6 + 0.05e6 * k));
  FfProbeOptions opt;
  opt.threads = 1;
  const auto scan = duty_cycle_deviation_scan(8, t, {0.1, 0.4, 0.8}, grid, opt);
  REQUIRE(scan.size() == 3);
  CHECK(scan[0].delta_prime == doctest::Approx(2.0 * std::sqrt(2.0) * kPi / (0.1 * t)));
  CHECK(scan[0].deviation < 0.02);
  CHECK(scan[2].deviation > 2.0 * scan[1].deviation);
  CHECK_THROWS(duty_cycle_deviation_scan(8, t, {1.2}, grid, opt));
}

TEST_CASE("population comparison") {
  const SystemParams p;
  const double dp = couplings().delta_prime;
  const std::vector<SequenceBuilder> builders = {
      [](const DerivedCouplings& dc) { return build_zdd(dc, 8, 1e-6); },
      [](const DerivedCouplings& dc) { return build_plain_train(dc, 8, 1e-6); },
  };
  const StateVector initial = StateVector::basis(Level::kPlusOne);
  const auto traces = compare_sequences(p, builders, {dp}, initial);
  REQUIRE(traces.size() == 2);
  CHECK(traces[0].max_free_leakage() < 1e-9);
  CHECK(traces[1].max_free_leakage() > 100.0 * std::max(traces[0].max_free_leakage(), 1e-9));
  // Rows cover the body only and end at the body length.
  CHECK(traces[0].rows.back().t_end == doctest::Approx(8e-6));
  for (const auto& row : traces[0].rows)
    CHECK(row.p_plus1 + row.p_zero + row.p_minus1 == doctest::Approx(1.0).epsilon(1e-12));

  std::ostringstream csv;
  write_population_csv(csv, traces);
  CHECK(csv.str().find("sequence") != std::string::npos);
}

TEST_CASE("SVG plot") {
  std::ostringstream out;
  write_svg_plot(out, {{"a", {0, 1, 2}, {0, 1, 4}}, {"b<&>", {0, 2}, {1, 1}}}, "x", "y", "title");
  const std::string s = out.str();
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("polyline") != std::string::npos);
  CHECK(s.find("b&lt;&amp;&gt;") != std::string::npos);
}
