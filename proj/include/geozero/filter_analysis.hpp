#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "geozero/sensing.hpp"
#include "geozero/sequences.hpp"

namespace geozero {

/// How the sign function treats the composite pulses inside the window.
enum class PulseConvention {
  kInstantaneous,    // sign flips at the composite midpoint, pulses count as free time
  kZeroDuringPulse,  // y = 0 while a composite is being applied
};

/// Piecewise-constant modulation y(t) between the two boundary pulses.
/// Local time runs from 0 (end of the first boundary pulse) to duration().
struct ModulationFunction {
  std::vector<double> breakpoints;  // size values.size() + 1, starting at 0
  std::vector<double> values;       // +1, -1 or 0
  double origin = 0.0;              // global time of local t = 0

  double duration() const { return breakpoints.empty() ? 0.0 : breakpoints.back(); }
  double value(double t_local) const;
  /// Integral of y(t) e^{i omega t} over the local window.
  std::complex<double> transform(double omega) const;
};

/// Throws NotADDSequence unless the sequence is boundary pulse, then free
/// segments and phase-pi composites (pairs of drive segments), then a
/// boundary pulse.
ModulationFunction modulation_function(const SequenceSpec& seq, PulseConvention convention);

/// F(omega) = |int y e^{i omega t} dt|^2 / T^2 with T the window length.
double filter_function(const ModulationFunction& y, double omega);

/// DQ phase the signal imprints through y(t): 2 * int b(t) y(t) dt, with
/// b(t) = gamma_e sqrt2 B_rms sin(2 pi f t + theta0) on the global clock.
double dq_phase_accumulation(const SequenceSpec& seq, const ACSignal& signal, double theta0,
                             PulseConvention convention = PulseConvention::kZeroDuringPulse);

struct FfProbeOptions {
  /// Target 2*b0*T. Inputs above 0.3 raise SignalTooStrong.
  double probe_phase = 0.1;
  int phase_samples = 32;
  bool field_during_pulses = true;
  int steps_per_pulse = 48;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Measures F(omega) from simulated coherence: a weak AC probe at omega with
/// phases spread over [0, 2pi) gives C = J0(2 b0 T sqrt F), inverted for F.
double measure_ff_via_simulation(const SequenceSpec& seq, double omega, const DerivedCouplings& dc,
                                 const ReadoutModel& readout = ReadoutModel::ideal(),
                                 const FfProbeOptions& options = {});

/// Inverse of J0 on [0, first zero]. Returns 0 for c >= 1.
double inverse_j0(double c);

struct DutyDeviation {
  double duty_cycle = 0.0;
  double delta_prime = 0.0;  // splitting that realizes the duty cycle at fixed t
  double deviation = 0.0;    // max|F_sim - F_ideal| / max F_ideal
};

/// Duty cycle d = 2T'/t is the fraction of each interval spent inside the
/// composite. For each d, sets delta' = 2 sqrt2 pi / (d t),
/// simulates the ZDD-N filter function at the omegas in `omega_grid` and
/// compares it with the instantaneous-pulse ideal.
std::vector<DutyDeviation> duty_cycle_deviation_scan(int N, double t, const std::vector<double>& duty_cycles,
                                                     const std::vector<double>& omega_grid,
                                                     const FfProbeOptions& options = {});

/// One row per segment of a sequence body.
struct PopulationRow {
  std::size_t segment = 0;
  SegmentKind kind = SegmentKind::kFree;
  double t_end = 0.0;  // s, from the start of the body
  double p_plus1 = 0.0;
  double p_zero = 0.0;
  double p_minus1 = 0.0;
};

struct PopulationTrace {
  std::string name;
  double Omega = 0.0;
  std::vector<PopulationRow> rows;

  /// Largest |0> population at the end of any free segment.
  double max_free_leakage() const;
};

using SequenceBuilder = std::function<SequenceSpec(const DerivedCouplings&)>;

/// Runs each builder at each drive amplitude (couplings of `p` evaluated
/// there), strips the two boundary pulses and records populations after
/// every segment of the body starting from `initial`.
std::vector<PopulationTrace> compare_sequences(const SystemParams& p, const std::vector<SequenceBuilder>& builders,
                                               const std::vector<double>& drive_amplitudes,
                                               const StateVector& initial);

void write_population_csv(std::ostream& out, const std::vector<PopulationTrace>& traces);

/// Minimal SVG line plot; one polyline per series.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
void write_svg_plot(std::ostream& out, const std::vector<PlotSeries>& series, const std::string& x_label,
                    const std::string& y_label, const std::string& title);

}  // namespace geozero
