#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "geozero/hamiltonian.hpp"
#include "geozero/propagation.hpp"

namespace geozero {

enum class SegmentKind { kDrive, kFree };

struct PulseSegment {
  SegmentKind kind = SegmentKind::kFree;
  double duration = 0.0;  // s
  double Omega = 0.0;     // rad/s, drive only
  double phi = 0.0;       // rad, drive only

  static PulseSegment drive(double duration, double Omega, double phi) {
    return {SegmentKind::kDrive, duration, Omega, phi};
  }
  static PulseSegment free(double duration) { return {SegmentKind::kFree, duration, 0.0, 0.0}; }
};

struct SequenceMeta {
  int N = 0;               // pulse count (pi-equivalents)
  double t = 0.0;          // pulse interval
  double tau = 0.0;        // correlation sub-interval
  double t_gap = 0.0;      // correlation gap
  double evolution = 0.0;  // time between the boundary pulses (Ramsey t, echo t, Nt)
};

struct SequenceSpec {
  std::string name;
  std::vector<PulseSegment> segments;
  SequenceMeta meta;

  double total_duration() const;
};

/// Pulse length of every 2pi pulse the builders emit: a full cycle at the
/// drive amplitude dc.Omega (T' at the matching condition).
double pulse_length(const DerivedCouplings& dc);

/// U_0 - free(t_free) - U_0.
SequenceSpec build_ramsey(const DerivedCouplings& dc, double t_free);

/// U_0 - free - G_pi - free - U_0, with `t_total` the time between the
/// boundary pulses (both free halves plus the composite). Throws
/// DurationTooShort when the composite does not fit.
SequenceSpec build_echo(const DerivedCouplings& dc, double t_total);

/// 2pi - (t'/2 - 4pi - t' - 4pi-bar - t'/2)^{N/2} - 2pi with t' = t - 2T'.
/// The composite 4pi is U_0 U_pi (U_pi first); 4pi-bar interchanges the phases.
SequenceSpec build_zdd(const DerivedCouplings& dc, int N, double t);

enum class StorageGate {
  kGHalfPi,  // composite G_{pi/2} = U_0 U_{pi/2}
  kUHalfPi,  // single 2pi pulse at phase pi/2
};

struct CorrelationOptions {
  StorageGate gate = StorageGate::kGHalfPi;
  /// Sign of the first storage rotation. Running both signs and taking the
  /// difference cancels the free precession of the unstored component.
  int store_sign = +1;
};

/// U_0 - [ZDD-N body at tau] - G_{pi/2} - free(t_gap) - G_{pi/2} - [ZDD-N body at tau] - U_0.
SequenceSpec build_correlation(const DerivedCouplings& dc, int N, double tau, double t_gap,
                               const CorrelationOptions& options = {});

/// Uniform-phase 2pi-pulse train: U_0 - (t'/2 - U_phi - t'/2)^{count} - U_0 with
/// t' = t - T_pulse, all pulses at the same phase. The contrast baseline for ZDD.
SequenceSpec build_plain_train(const DerivedCouplings& dc, int count, double t, double phi = 0.0);

/// Train with user-supplied per-pulse phases (one phase per 2pi pulse,
/// boundary pulses excluded); the plug-in point for externally defined
/// phase patterns.
SequenceSpec build_phase_pattern_train(const DerivedCouplings& dc, const std::vector<double>& phases, double t,
                                       const std::string& name = "phase-pattern");

/// Scalar coefficient b(t) of a perturbation b(t)*Sz on top of the control.
/// Collects a static shift, a coherent AC signal and a sampled noise path.
struct LongitudinalField {
  struct Signal {
    double amplitude = 0.0;  // rad/s, peak coefficient of Sz
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // rad
  };

  double static_shift = 0.0;
  std::optional<Signal> signal;
  // Piecewise-linear cumulative integral of a noise path over `knots`.
  std::vector<double> knots;
  std::vector<double> cumulative;

  bool empty() const { return static_shift == 0.0 && !signal && knots.empty(); }
  double value(double t) const;
  double integral(double t0, double t1) const;
};

struct AnalyticOptions {
  const LongitudinalField* field = nullptr;
  /// Apply the field during drive segments as well (finite-pulse dynamics).
  bool field_during_pulses = false;
  int steps_per_pulse = 64;
};

/// Time-ordered product of RWA propagators. Drive segments are exact
/// exponentials of the rotating-frame Hamiltonian at their amplitude and
/// phase. Throws ModeUnsupported for malformed segments.
Propagator compile_analytic(const SequenceSpec& seq, const DerivedCouplings& dc, const AnalyticOptions& options = {});

/// Same product, also returning the state after every segment.
struct SegmentTrace {
  std::vector<StateVector> states;  // states[k] is the state after segment k
  Propagator total;
};
SegmentTrace trace_analytic(const SequenceSpec& seq, const DerivedCouplings& dc, const StateVector& initial,
                            const AnalyticOptions& options = {});

/// Drive waveform on a global clock: Omega*cos(omega*t + phi) within [t_start, t_end).
struct LabSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  double Omega = 0.0;
  double phi = 0.0;
  bool drive = false;

  double waveform(double t, double carrier) const;
};

std::vector<LabSegment> compile_lab_frame(const SequenceSpec& seq);

enum class CompileMode { kAnalytic, kLabFrame };
using CompiledSequence = std::variant<Propagator, std::vector<LabSegment>>;

CompiledSequence compile(const SequenceSpec& seq, const DerivedCouplings& dc, CompileMode mode);

/// Integrates the lab-frame Hamiltonian over the compiled schedule with the
/// carrier at p.resonance() and returns the rotating-frame propagator.
Propagator simulate_lab_frame(const std::vector<LabSegment>& schedule, const SystemParams& p, int steps_per_period,
                              const LongitudinalField* field = nullptr);

/// One segment per line: kind,duration_ns,omega_MHz,phi_rad. Lines starting
/// with '#' are comments; "# name: ..." carries the sequence name.
void write_sequence_text(std::ostream& out, const SequenceSpec& seq);
std::string to_sequence_text(const SequenceSpec& seq);
SequenceSpec parse_sequence_text(std::istream& in);

}  // namespace geozero
