#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geozero/sequences.hpp"
#include "geozero/units.hpp"

namespace geozero {

/// Coherent AC field B(t) = sqrt2 * B_rms * sin(2 pi f t + theta0) on the
/// global sequence clock, coupling as gamma_e * B(t) * Sz.
struct ACSignal {
  enum class Phase {
    kFixed,          // theta0 as given
    kRandomUniform,  // independent uniform draw per realization
    kStratified,     // realization r draws uniformly inside [2 pi r/n, 2 pi (r+1)/n)
    kUniformGrid,    // theta0 + 2 pi (r + 1/2)/n, deterministic; exact for smooth phase averages
  };

  double B_rms = 0.0;      // T
  double frequency = 0.0;  // Hz
  Phase phase_mode = Phase::kRandomUniform;
  double theta0 = 0.0;  // rad, kFixed only
  double gamma_e = units::kGammaElectron;

  /// Peak coefficient of Sz in rad/s.
  double sz_amplitude() const;
  LongitudinalField::Signal realize(double theta) const;
};

struct OUComponent {
  double sigma = 0.0;  // stationary std of the {|+>,|->} splitting, rad/s
  double tau_c = 0.0;  // correlation time, s

  bool operator==(const OUComponent&) const = default;
};

/// Detuning noise on the {|+>,|->} splitting. A splitting eta enters the
/// Hamiltonian as (eta/2) Sz, so the DQ phase runs at eta.
struct DephasingModel {
  enum class Kind { kNone, kQuasiStaticGaussian, kOrnsteinUhlenbeck, kEnvelope };

  Kind kind = Kind::kNone;
  double sigma = 0.0;               // quasi-static splitting std, rad/s
  std::vector<OUComponent> ou;      // independent components, summed
  double envelope_T = 0.0;          // s
  double envelope_p = 2.0;

  static DephasingModel none() { return {}; }
  static DephasingModel quasi_static(double sigma);
  /// sigma = sqrt2 / T2*, giving a Ramsey envelope exp[-(t/T2*)^2].
  static DephasingModel quasi_static_from_T2star(double T2_star);
  static DephasingModel ornstein_uhlenbeck(std::vector<OUComponent> components);
  /// Multiplies the coherence 2*p0 - 1 by exp[-(t/T)^p], p in [1, 3].
  static DephasingModel envelope(double T, double p);

  void validate() const;
  bool operator==(const DephasingModel&) const = default;
};

struct ReadoutModel {
  enum class Kind { kIdeal, kShotNoise };

  Kind kind = Kind::kIdeal;
  /// Mean photons per shot. Zero means a single projective measurement per realization.
  double photons_per_shot = 0.0;
  double contrast = 1.0;

  static ReadoutModel ideal() { return {}; }
  static ReadoutModel shot_noise(double photons_per_shot = 0.0, double contrast = 1.0) {
    return {Kind::kShotNoise, photons_per_shot, contrast};
  }

  bool operator==(const ReadoutModel&) const = default;
};

struct ExperimentResult {
  std::vector<double> sweep;
  std::vector<double> p0;
  std::vector<double> stderr_p0;
  int n_realizations = 0;
  std::uint64_t rng_seed = 0;

  /// 2*p0 - 1 per point.
  std::vector<double> coherence() const;
};

/// Maps a sweep value to the sequence measured at that point. When
/// `reference` is set, each realization also runs the reference sequence
/// with the same noise and signal draw and records 1/2 + (p_main - p_ref)/2.
struct SweepPlan {
  std::function<SequenceSpec(double)> make;
  std::function<SequenceSpec(double)> reference;
};

struct ExperimentOptions {
  bool field_during_pulses = false;
  int steps_per_pulse = 64;
  unsigned threads = 0;
  StateVector initial = StateVector::basis(Level::kZero);
};

/// Monte-Carlo experiment: for every sweep point and realization, draws
/// noise and signal phase, evolves `initial` through the compiled sequence and
/// records |<0|psi>|^2 through the readout model. Results depend only on
/// (seed, n, sweep): realization r uses a generator seeded from (seed, r).
ExperimentResult run_experiment(const SweepPlan& plan, const DerivedCouplings& dc, const DephasingModel& noise,
                                const std::optional<ACSignal>& signal, const ReadoutModel& readout,
                                const std::vector<double>& sweep, int n, std::uint64_t seed,
                                const ExperimentOptions& options = {});

/// Correlation spectroscopy sweep over t_gap with the two-sign storage
/// cycle. p0 = 1/2 + <sin psi1 sin psi2>-type correlation / 2.
ExperimentResult run_correlation(const DerivedCouplings& dc, int N, double tau, const std::vector<double>& t_gaps,
                                 const DephasingModel& noise, const std::optional<ACSignal>& signal,
                                 const ReadoutModel& readout, int n, std::uint64_t seed,
                                 const CorrelationOptions& options = {}, const ExperimentOptions& experiment = {});

/// Generator for realization `index` of a run seeded with `seed`.
std::mt19937_64 realization_rng(std::uint64_t seed, std::uint64_t index);

/// Samples the field one realization sees over `seq`: quasi-static shift,
/// OU path (exact joint sampling of value and integral between segment
/// boundaries) and signal phase.
LongitudinalField sample_field(const SequenceSpec& seq, const DephasingModel& noise,
                               const std::optional<ACSignal>& signal, std::mt19937_64& rng, int realization,
                               int n_realizations);

/// Writes "sweep_<unit>,p0_mean,p0_stderr" rows with the given sweep scale.
void write_result_csv(std::ostream& out, const ExperimentResult& result, const std::string& sweep_column,
                      double sweep_scale);

}  // namespace geozero
