#include "geozero/filter_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>
#include <gsl/gsl_sf_bessel.h>

#include "geozero/errors.hpp"

namespace geozero {

namespace {

constexpr double kFirstJ0Zero = 2.404825557695773;

bool is_pi_pair(const PulseSegment& a, const PulseSegment& b) {
  const double d = std::remainder(a.phi - b.phi, kTwoPi);
  return std::abs(std::abs(d) - kPi) < 1e-9;
}

std::complex<double> interval_transform(double a, double b, double omega) {
  const double h = b - a;
  const double x = 0.5 * omega * h;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return std::polar(h * sinc, omega * (a + 0.5 * h));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

double ModulationFunction::value(double t) const {
  if (values.empty() || t < 0.0 || t > duration()) return 0.0;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  std::size_t k = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  return values[std::min(k, values.size() - 1)];
}

std::complex<double> ModulationFunction::transform(double omega) const {
  std::complex<double> sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] == 0.0) continue;
    sum += values[k] * interval_transform(breakpoints[k], breakpoints[k + 1], omega);
  }
  return sum;
}

ModulationFunction modulation_function(const SequenceSpec& seq, PulseConvention convention) {
  const auto& segs = seq.segments;
  if (segs.size() < 2 || segs.front().kind != SegmentKind::kDrive || segs.back().kind != SegmentKind::kDrive) {
    throw NotADDSequence(seq.name + ": expected boundary pulses at both ends");
  }
  ModulationFunction y;
  y.origin = segs.front().duration;
  y.breakpoints.push_back(0.0);
  double cursor = 0.0;
  double sign = 1.0;
  auto push = [&](double duration, double v) {
    cursor += duration;
    if (!y.values.empty() && y.values.back() == v) {
      y.breakpoints.back() = cursor;
    } else {
      y.values.push_back(v);
      y.breakpoints.push_back(cursor);
    }
  };
  for (std::size_t i = 1; i + 1 < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.kind == SegmentKind::kFree) {
      push(s.duration, sign);
      continue;
    }
    if (i + 2 >= segs.size() || segs[i + 1].kind != SegmentKind::kDrive || !is_pi_pair(s, segs[i + 1])) {
      throw NotADDSequence(seq.name + ": segment " + std::to_string(i) + " is not part of a phase-pi composite");
    }
    const auto& second = segs[i + 1];
    if (convention == PulseConvention::kInstantaneous) {
      // The composite is treated as free time with the flip at its centre.
      const double total = s.duration + second.duration;
      push(0.5 * total, sign);
      sign = -sign;
      push(0.5 * total, sign);
    } else {
      push(s.duration + second.duration, 0.0);
      sign = -sign;
    }
    ++i;
  }
  return y;
}

double filter_function(const ModulationFunction& y, double omega) {
  const double T = y.duration();
  if (!(T > 0.0)) return 0.0;
  return std::norm(y.transform(omega)) / (T * T);
}

double dq_phase_accumulation(const SequenceSpec& seq, const ACSignal& signal, double theta0,
                             PulseConvention convention) {
  const ModulationFunction y = modulation_function(seq, convention);
  const double omega = kTwoPi * signal.frequency;
  const std::complex<double> k = y.transform(omega);
  return 2.0 * signal.sz_amplitude() * std::imag(std::polar(1.0, omega * y.origin + theta0) * k);
}

double inverse_j0(double c) {
  if (c >= 1.0) return 0.0;
  if (c <= 0.0) throw FitDiverged("inverse_j0: coherence " + fmt("%g", c) + " is below the first J0 zero");
  gsl_function f;
  f.function = [](double x, void* params) { return gsl_sf_bessel_J0(x) - *static_cast<double*>(params); };
  f.params = &c;
  gsl_root_fsolver* s = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
  gsl_root_fsolver_set(s, &f, 0.0, kFirstJ0Zero);
  double root = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    gsl_root_fsolver_iterate(s);
    root = gsl_root_fsolver_root(s);
    if (gsl_root_test_interval(gsl_root_fsolver_x_lower(s), gsl_root_fsolver_x_upper(s), 0.0, 1e-15) != GSL_CONTINUE) {
      break;
    }
  }
  gsl_root_fsolver_free(s);
  return root;
}

double measure_ff_via_simulation(const SequenceSpec& seq, double omega, const DerivedCouplings& dc,
                                 const ReadoutModel& readout, const FfProbeOptions& options) {
  if (options.probe_phase > 0.3) {
    throw SignalTooStrong("measure_ff_via_simulation: probe 2*b0*T = " + fmt("%g", options.probe_phase) +
                          " exceeds 0.3; the J0 inversion is no longer weak-signal");
  }
  if (!(options.probe_phase > 0.0)) throw Error("measure_ff_via_simulation: probe phase must be positive");
  if (seq.segments.size() < 2) throw NotADDSequence(seq.name + ": no boundary pulses");
  const double T = seq.total_duration() - seq.segments.front().duration - seq.segments.back().duration;
  if (!(T > 0.0)) throw NotADDSequence(seq.name + ": empty sensing window");

  const double b0 = options.probe_phase / (2.0 * T);
  ACSignal probe;
  probe.frequency = omega / kTwoPi;
  probe.B_rms = b0 / (probe.gamma_e * std::sqrt(2.0));
  probe.phase_mode = ACSignal::Phase::kUniformGrid;

  SweepPlan plan;
  plan.make = [&](double) { return seq; };
  ExperimentOptions exp;
  exp.field_during_pulses = options.field_during_pulses;
  exp.steps_per_pulse = options.steps_per_pulse;
  exp.threads = options.threads;
  const ExperimentResult r =
      run_experiment(plan, dc, DephasingModel::none(), probe, readout, {omega}, options.phase_samples, options.seed, exp);
  const double c = 2.0 * r.p0.front() - 1.0;
  const double a = inverse_j0(c);
  return std::pow(a / (2.0 * b0 * T), 2);
}

std::vector<DutyDeviation> duty_cycle_deviation_scan(int N, double t, const std::vector<double>& duty_cycles,
                                                     const std::vector<double>& omega_grid,
                                                     const FfProbeOptions& options) {
  if (omega_grid.empty()) throw Error("duty_cycle_deviation_scan: empty frequency grid");
  std::vector<DutyDeviation> out;
  for (double d : duty_cycles) {
    if (!(d > 0.0 && d < 1.0)) throw Error("duty_cycle_deviation_scan: duty cycle must lie in (0, 1)");
    SystemParams p;
    p.delta = 2.0 * std::sqrt(2.0) * kPi / (d * t);
    const DerivedCouplings dc = matched_couplings(p);
    const SequenceSpec seq = build_zdd(dc, N, t);
    const ModulationFunction ideal = modulation_function(seq, PulseConvention::kInstantaneous);
    double worst = 0.0;
    double peak = 0.0;
    for (double w : omega_grid) {
      const double f_ideal = filter_function(ideal, w);
      const double f_sim = measure_ff_via_simulation(seq, w, dc, ReadoutModel::ideal(), options);
      worst = std::max(worst, std::abs(f_sim - f_ideal));
      peak = std::max(peak, f_ideal);
    }
    out.push_back({d, dc.delta_prime, peak > 0.0 ? worst / peak : std::numeric_limits<double>::infinity()});
  }
  return out;
}

double PopulationTrace::max_free_leakage() const {
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.kind == SegmentKind::kFree) worst = std::max(worst, r.p_zero);
  }
  return worst;
}

std::vector<PopulationTrace> compare_sequences(const SystemParams& p, const std::vector<SequenceBuilder>& builders,
                                               const std::vector<double>& drive_amplitudes,
                                               const StateVector& initial) {
  std::vector<PopulationTrace> out;
  for (const auto& build : builders) {
    for (double Omega : drive_amplitudes) {
      const DerivedCouplings dc = derived_couplings(p, Omega);
      SequenceSpec seq = build(dc);
      if (seq.segments.size() < 2) throw NotADDSequence(seq.name + ": no body between boundary pulses");
      SequenceSpec body = seq;
      body.segments.assign(seq.segments.begin() + 1, seq.segments.end() - 1);
      const SegmentTrace trace = trace_analytic(body, dc, initial);
      PopulationTrace pt;
      pt.name = seq.name;
      pt.Omega = Omega;
      double t = 0.0;
      for (std::size_t k = 0; k < body.segments.size(); ++k) {
        t += body.segments[k].duration;
        const StateVector& s = trace.states[k];
        pt.rows.push_back({k, body.segments[k].kind, t, s.population(Level::kPlusOne), s.population(Level::kZero),
                           s.population(Level::kMinusOne)});
      }
      out.push_back(std::move(pt));
    }
  }
  return out;
}

void write_population_csv(std::ostream& out, const std::vector<PopulationTrace>& traces) {
  out << "sequence,omega_MHz,segment,kind,t_end_ns,p_plus1,p_0,p_minus1\n";
  char line[256];
  for (const auto& tr : traces) {
    for (const auto& r : tr.rows) {
      std::snprintf(line, sizeof line, "%s,%.9g,%zu,%s,%.9g,%.12g,%.12g,%.12g\n", tr.name.c_str(),
                    units::to_mhz(tr.Omega), r.segment, r.kind == SegmentKind::kDrive ? "drive" : "free",
                    r.t_end / units::kNanosecond, r.p_plus1, r.p_zero, r.p_minus1);
      out << line;
    }
  }
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(std::ostream& out, const std::vector<PlotSeries>& series, const std::string& x_label,
                    const std::string& y_label, const std::string& title) {
  constexpr double W = 640, H = 420, L = 70, R = 20, Tm = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) {
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << fmt("%.4g", xv) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << fmt("%.4g", yv) << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(x_label)
      << "</text>\n";
  out << "<text transform=\"translate(16," << H / 2 << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">"
      << xml_escape(y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (std::isfinite(s.y[k])) out << fmt("%.2f", px(s.x[k])) << ',' << fmt("%.2f", py(s.y[k])) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R - 8 << "\" y=\"" << Tm + 16 + 16 * i << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
        << color << "\">" << xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace geozero
