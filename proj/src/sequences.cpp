#include "geozero/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "geozero/errors.hpp"
#include "geozero/units.hpp"

namespace geozero {

namespace {

void add_free(std::vector<PulseSegment>& segs, double duration) {
  if (duration > 0.0) segs.push_back(PulseSegment::free(duration));
}

// G_theta = U_phi U_{phi+theta}: the phi+theta pulse is emitted first.
void add_composite(std::vector<PulseSegment>& segs, const DerivedCouplings& dc, double phi, double theta) {
  const double len = pulse_length(dc);
  segs.push_back(PulseSegment::drive(len, dc.Omega, phi + theta));
  segs.push_back(PulseSegment::drive(len, dc.Omega, phi));
}

void add_boundary(std::vector<PulseSegment>& segs, const DerivedCouplings& dc) {
  segs.push_back(PulseSegment::drive(pulse_length(dc), dc.Omega, 0.0));
}

void require_positive_couplings(const DerivedCouplings& dc) {
  if (!(dc.delta_prime > 0.0)) throw DegenerateSplitting("sequence builder: delta' must be positive");
}

// Body of a ZDD-N: (t'/2 - 4pi - t' - 4pi-bar - t'/2)^{N/2}.
void add_zdd_body(std::vector<PulseSegment>& segs, const DerivedCouplings& dc, int N, double t) {
  const double t_free = t - 2.0 * pulse_length(dc);
  for (int block = 0; block < N / 2; ++block) {
    add_free(segs, 0.5 * t_free);
    add_composite(segs, dc, 0.0, kPi);  // U_0 U_pi
    add_free(segs, t_free);
    add_composite(segs, dc, kPi, kPi);  // U_pi U_0, phases interchanged
    add_free(segs, 0.5 * t_free);
  }
}

void check_zdd_args(const DerivedCouplings& dc, int N, double t, const char* who) {
  require_positive_couplings(dc);
  if (N < 2 || N % 2 != 0) throw Error(std::string(who) + ": N must be even and at least 2");
  if (!(t > 2.0 * pulse_length(dc))) {
    throw DurationTooShort(std::string(who) + ": pulse interval must exceed the composite length 2T'");
  }
}

void check_segment(const PulseSegment& s, std::size_t index) {
  const bool ok = std::isfinite(s.duration) && s.duration > 0.0 && std::isfinite(s.Omega) && std::isfinite(s.phi) &&
                  (s.kind == SegmentKind::kFree ? s.Omega == 0.0 : s.Omega >= 0.0);
  if (!ok) throw ModeUnsupported("segment " + std::to_string(index) + " is malformed");
}

bool commutes_with_sz(const Operator& h) {
  const Operator& sz = spin_operators().z;
  return (h * sz - sz * h).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff());
}

class PulseCache {
 public:
  explicit PulseCache(const DerivedCouplings& dc) : dc_(dc) {}

  const Operator& get(const PulseSegment& s) {
    const auto key = std::make_tuple(s.duration, s.Omega, s.phi);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, evolve_constant(rwa_hamiltonian(dc_, s.Omega, s.phi), s.duration).matrix).first;
    }
    return it->second;
  }

 private:
  const DerivedCouplings& dc_;
  std::map<std::tuple<double, double, double>, Operator> cache_;
};

Operator stepped(const Operator& h0, const LongitudinalField& field, double t0, double duration, long steps) {
  const Operator& sz = spin_operators().z;
  const double dt = duration / static_cast<double>(steps);
  Operator u = Operator::Identity();
  for (long k = 0; k < steps; ++k) {
    const double a = t0 + k * dt;
    // Interval mean of b(t); for smooth b it matches the midpoint value to O(dt^2).
    const double b = field.integral(a, a + dt) / dt;
    u = unitary_step(h0 + b * sz, dt) * u;
  }
  return u;
}

Operator segment_propagator(const PulseSegment& s, double t0, const DerivedCouplings& dc,
                            const AnalyticOptions& options, PulseCache& cache) {
  const LongitudinalField* field = options.field;
  const bool perturbed = field && !field->empty() &&
                         (s.kind == SegmentKind::kFree || options.field_during_pulses);
  if (!perturbed) {
    if (s.kind == SegmentKind::kDrive) return cache.get(s);
    return evolve_constant(rwa_hamiltonian(dc, 0.0, 0.0), s.duration).matrix;
  }
  const Operator h0 = rwa_hamiltonian(dc, s.kind == SegmentKind::kDrive ? s.Omega : 0.0, s.phi);
  if (s.kind == SegmentKind::kFree && commutes_with_sz(h0)) {
    const double area = field->integral(t0, t0 + s.duration);
    return evolve_constant(h0 + (area / s.duration) * spin_operators().z, s.duration).matrix;
  }
  long steps = options.steps_per_pulse;
  if (s.kind == SegmentKind::kFree) {
    const double fastest = dc.delta_prime + (field->signal ? kTwoPi * field->signal->frequency : 0.0);
    steps = std::max<long>(8, static_cast<long>(std::ceil(fastest * s.duration / 0.05)));
  }
  return stepped(h0, *field, t0, s.duration, std::max<long>(1, steps));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double SequenceSpec::total_duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

double pulse_length(const DerivedCouplings& dc) { return two_pi_duration(dc, dc.Omega); }

SequenceSpec build_ramsey(const DerivedCouplings& dc, double t_free) {
  require_positive_couplings(dc);
  if (t_free < 0.0) throw Error("build_ramsey: t_free must be non-negative");
  SequenceSpec seq;
  seq.name = "ramsey";
  add_boundary(seq.segments, dc);
  add_free(seq.segments, t_free);
  add_boundary(seq.segments, dc);
  seq.meta.t = t_free;
  seq.meta.evolution = t_free;
  return seq;
}

SequenceSpec build_echo(const DerivedCouplings& dc, double t_total) {
  require_positive_couplings(dc);
  const double composite = 2.0 * pulse_length(dc);
  if (!(t_total >= composite)) {
    throw DurationTooShort("build_echo: t_total must hold the 4pi composite (2T')");
  }
  SequenceSpec seq;
  seq.name = "echo";
  const double half = 0.5 * (t_total - composite);
  add_boundary(seq.segments, dc);
  add_free(seq.segments, half);
  add_composite(seq.segments, dc, 0.0, kPi);
  add_free(seq.segments, half);
  add_boundary(seq.segments, dc);
  seq.meta.N = 1;
  seq.meta.t = t_total;
  seq.meta.evolution = t_total;
  return seq;
}

SequenceSpec build_zdd(const DerivedCouplings& dc, int N, double t) {
  check_zdd_args(dc, N, t, "build_zdd");
  SequenceSpec seq;
  seq.name = "zdd-" + std::to_string(N);
  add_boundary(seq.segments, dc);
  add_zdd_body(seq.segments, dc, N, t);
  add_boundary(seq.segments, dc);
  seq.meta.N = N;
  seq.meta.t = t;
  seq.meta.evolution = N * t;
  return seq;
}

SequenceSpec build_correlation(const DerivedCouplings& dc, int N, double tau, double t_gap,
                               const CorrelationOptions& options) {
  check_zdd_args(dc, N, tau, "build_correlation");
  if (t_gap < 0.0) throw Error("build_correlation: t_gap must be non-negative");
  if (options.store_sign != 1 && options.store_sign != -1) throw Error("build_correlation: store_sign must be +-1");
  SequenceSpec seq;
  seq.name = "corr-" + std::to_string(N);
  auto storage = [&](double sign) {
    if (options.gate == StorageGate::kGHalfPi) {
      add_composite(seq.segments, dc, 0.0, sign * kPi / 2.0);
    } else {
      seq.segments.push_back(PulseSegment::drive(pulse_length(dc), dc.Omega, sign * kPi / 2.0));
    }
  };
  add_boundary(seq.segments, dc);
  add_zdd_body(seq.segments, dc, N, tau);
  storage(options.store_sign);
  add_free(seq.segments, t_gap);
  storage(1.0);
  add_zdd_body(seq.segments, dc, N, tau);
  add_boundary(seq.segments, dc);
  seq.meta.N = N;
  seq.meta.t = tau;
  seq.meta.tau = tau;
  seq.meta.t_gap = t_gap;
  seq.meta.evolution = 2.0 * N * tau;
  return seq;
}

SequenceSpec build_phase_pattern_train(const DerivedCouplings& dc, const std::vector<double>& phases, double t,
                                       const std::string& name) {
  require_positive_couplings(dc);
  const double len = pulse_length(dc);
  if (!(t > len)) throw DurationTooShort("phase pattern train: interval must exceed the pulse length");
  SequenceSpec seq;
  seq.name = name;
  add_boundary(seq.segments, dc);
  for (double phase : phases) {
    add_free(seq.segments, 0.5 * (t - len));
    seq.segments.push_back(PulseSegment::drive(len, dc.Omega, phase));
    add_free(seq.segments, 0.5 * (t - len));
  }
  add_boundary(seq.segments, dc);
  seq.meta.N = static_cast<int>(phases.size());
  seq.meta.t = t;
  seq.meta.evolution = phases.size() * t;
  return seq;
}

SequenceSpec build_plain_train(const DerivedCouplings& dc, int count, double t, double phi) {
  return build_phase_pattern_train(dc, std::vector<double>(std::max(0, count), phi), t, "plain-" + std::to_string(count));
}

double LongitudinalField::value(double t) const {
  double b = static_shift;
  if (signal) b += signal->amplitude * std::sin(kTwoPi * signal->frequency * t + signal->phase);
  if (knots.size() >= 2) {
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    std::size_t k = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
    k = std::min(k, knots.size() - 2);
    b += (cumulative[k + 1] - cumulative[k]) / (knots[k + 1] - knots[k]);
  }
  return b;
}

double LongitudinalField::integral(double t0, double t1) const {
  double area = static_shift * (t1 - t0);
  if (signal && signal->amplitude != 0.0) {
    const double w = kTwoPi * signal->frequency;
    if (w == 0.0) {
      area += signal->amplitude * std::sin(signal->phase) * (t1 - t0);
    } else {
      area += signal->amplitude / w * (std::cos(w * t0 + signal->phase) - std::cos(w * t1 + signal->phase));
    }
  }
  if (knots.size() >= 2) {
    auto cumulative_at = [&](double t) {
      if (t <= knots.front()) return cumulative.front();
      if (t >= knots.back()) return cumulative.back();
      const auto it = std::upper_bound(knots.begin(), knots.end(), t);
      const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
      const double frac = (t - knots[k]) / (knots[k + 1] - knots[k]);
      return cumulative[k] + frac * (cumulative[k + 1] - cumulative[k]);
    };
    area += cumulative_at(t1) - cumulative_at(t0);
  }
  return area;
}

Propagator compile_analytic(const SequenceSpec& seq, const DerivedCouplings& dc, const AnalyticOptions& options) {
  PulseCache cache(dc);
  Operator u = Operator::Identity();
  double t = 0.0;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const auto& s = seq.segments[i];
    check_segment(s, i);
    u = segment_propagator(s, t, dc, options, cache) * u;
    t += s.duration;
  }
  return {u, t};
}

SegmentTrace trace_analytic(const SequenceSpec& seq, const DerivedCouplings& dc, const StateVector& initial,
                            const AnalyticOptions& options) {
  PulseCache cache(dc);
  SegmentTrace trace;
  trace.states.reserve(seq.segments.size());
  Operator u = Operator::Identity();
  double t = 0.0;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const auto& s = seq.segments[i];
    check_segment(s, i);
    u = segment_propagator(s, t, dc, options, cache) * u;
    t += s.duration;
    trace.states.push_back(geozero::apply(u, initial));
  }
  trace.total = {u, t};
  return trace;
}

double LabSegment::waveform(double t, double carrier) const {
  return drive ? Omega * std::cos(carrier * t + phi) : 0.0;
}

std::vector<LabSegment> compile_lab_frame(const SequenceSpec& seq) {
  std::vector<LabSegment> out;
  out.reserve(seq.segments.size());
  double t = 0.0;
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const auto& s = seq.segments[i];
    check_segment(s, i);
    const bool drive = s.kind == SegmentKind::kDrive;
    out.push_back({t, t + s.duration, drive ? s.Omega : 0.0, drive ? s.phi : 0.0, drive});
    t += s.duration;
  }
  return out;
}

CompiledSequence compile(const SequenceSpec& seq, const DerivedCouplings& dc, CompileMode mode) {
  if (mode == CompileMode::kAnalytic) return compile_analytic(seq, dc);
  return compile_lab_frame(seq);
}

Propagator simulate_lab_frame(const std::vector<LabSegment>& schedule, const SystemParams& p, int steps_per_period,
                              const LongitudinalField* field) {
  const double carrier = p.resonance();
  const double period = kTwoPi / carrier;
  const Operator& sz = spin_operators().z;
  Propagator lab = Propagator::identity();
  double fastest = carrier + p.delta + 2.0 * p.d_perp * (std::abs(p.Pi[0]) + std::abs(p.Pi[1]));
  for (const auto& seg : schedule) fastest = std::max(fastest, carrier + seg.Omega + p.delta);
  for (const auto& seg : schedule) {
    const double span = seg.t_end - seg.t_start;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(span / period * steps_per_period)));
    DriveParams d{seg.Omega, carrier, seg.phi};
    auto h = [&](double t) {
      Operator m = lab_hamiltonian(p, d, t);
      if (field) m += field->value(t) * sz;
      return m;
    };
    lab = compose(evolve_time_dependent(h, seg.t_start, seg.t_end, steps, fastest), lab);
  }
  const double t_end = schedule.empty() ? 0.0 : schedule.back().t_end;
  return rotating_frame_transform(lab, carrier, 0.0, t_end);
}

void write_sequence_text(std::ostream& out, const SequenceSpec& seq) {
  out << "# name: " << seq.name << "\n";
  out << "# kind,duration_ns,omega_MHz,phi_rad\n";
  for (const auto& s : seq.segments) {
    out << (s.kind == SegmentKind::kDrive ? "drive" : "free") << ',' << format_double(s.duration / units::kNanosecond)
        << ',' << format_double(units::to_mhz(s.Omega)) << ',' << format_double(s.phi) << '\n';
  }
}

std::string to_sequence_text(const SequenceSpec& seq) {
  std::ostringstream out;
  write_sequence_text(out, seq);
  return out.str();
}

SequenceSpec parse_sequence_text(std::istream& in) {
  SequenceSpec seq;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# name: ";
      if (line.rfind(tag, 0) == 0) seq.name = line.substr(tag.size());
      continue;
    }
    std::stringstream fields(line);
    std::string kind, duration, omega, phi;
    if (!std::getline(fields, kind, ',') || !std::getline(fields, duration, ',') || !std::getline(fields, omega, ',') ||
        !std::getline(fields, phi)) {
      throw ConfigError("expected kind,duration_ns,omega_MHz,phi_rad", line_no);
    }
    PulseSegment s;
    try {
      if (kind == "drive") {
        s.kind = SegmentKind::kDrive;
      } else if (kind == "free") {
        s.kind = SegmentKind::kFree;
      } else {
        throw ConfigError("unknown segment kind", line_no, kind);
      }
      s.duration = std::stod(duration) * units::kNanosecond;
      s.Omega = units::mhz(std::stod(omega));
      s.phi = std::stod(phi);
    } catch (const std::logic_error&) {
      throw ConfigError("malformed number", line_no);
    }
    seq.segments.push_back(s);
  }
  return seq;
}

}  // namespace geozero
