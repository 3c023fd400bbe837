#include "geozero/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "geozero/errors.hpp"

namespace geozero {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct OUStep {
  double value;
  double integral;
};

// Exact conditional draw of (eta(h), int_0^h eta) for a stationary OU process.
OUStep ou_step(double eta0, double h, const OUComponent& c, std::normal_distribution<double>& gauss,
               std::mt19937_64& rng) {
  const double x = h / c.tau_c;
  const double a = std::exp(-x);
  const double s2 = c.sigma * c.sigma;
  const double tau = c.tau_c;
  const double var_value = s2 * -std::expm1(-2.0 * x);
  double bracket;
  if (x < 1e-2) {
    bracket = x * x * x * (2.0 / 3.0 - x * (0.5 - x * 7.0 / 30.0));
  } else {
    bracket = 2.0 * x - 3.0 + 4.0 * a - a * a;
  }
  const double var_integral = s2 * tau * tau * bracket;
  const double cov = s2 * tau * std::expm1(-x) * std::expm1(-x);

  const double z1 = gauss(rng);
  const double z2 = gauss(rng);
  const double xi1 = var_value > 0.0 ? std::sqrt(var_value) * z1 : 0.0;
  double xi2 = 0.0;
  if (var_value > 0.0) {
    const double conditional = std::max(0.0, var_integral - cov * cov / var_value);
    xi2 = cov / var_value * xi1 + std::sqrt(conditional) * z2;
  } else {
    xi2 = std::sqrt(std::max(0.0, var_integral)) * z2;
  }
  return {a * eta0 + xi1, -tau * std::expm1(-x) * eta0 + xi2};
}

double read_out(double p0, const ReadoutModel& readout, std::mt19937_64& rng) {
  p0 = std::clamp(p0, 0.0, 1.0);
  if (readout.kind == ReadoutModel::Kind::kIdeal) return p0;
  if (readout.photons_per_shot <= 0.0) {
    std::bernoulli_distribution shot(p0);
    return shot(rng) ? 1.0 : 0.0;
  }
  const double c = readout.contrast;
  const double mean = readout.photons_per_shot * (1.0 - c * (1.0 - p0));
  std::poisson_distribution<long> photons(mean);
  const double rate = static_cast<double>(photons(rng)) / readout.photons_per_shot;
  return (rate - (1.0 - c)) / c;
}

double envelope_factor(const DephasingModel& noise, const SequenceSpec& seq) {
  if (noise.kind != DephasingModel::Kind::kEnvelope) return 1.0;
  return std::exp(-std::pow(seq.meta.evolution / noise.envelope_T, noise.envelope_p));
}

double final_p0(const SequenceSpec& seq, const DerivedCouplings& dc, const LongitudinalField& field,
                const ExperimentOptions& options, double envelope) {
  AnalyticOptions analytic;
  analytic.field = field.empty() ? nullptr : &field;
  analytic.field_during_pulses = options.field_during_pulses;
  analytic.steps_per_pulse = options.steps_per_pulse;
  const Propagator u = compile_analytic(seq, dc, analytic);
  const StateVector out = geozero::apply(u.matrix, options.initial);
  const double p0 = out.population(Level::kZero);
  return 0.5 + (p0 - 0.5) * envelope;
}

}  // namespace

double ACSignal::sz_amplitude() const { return gamma_e * std::sqrt(2.0) * B_rms; }

LongitudinalField::Signal ACSignal::realize(double theta) const { return {sz_amplitude(), frequency, theta}; }

DephasingModel DephasingModel::quasi_static(double sigma) {
  DephasingModel m;
  m.kind = Kind::kQuasiStaticGaussian;
  m.sigma = sigma;
  return m;
}

DephasingModel DephasingModel::quasi_static_from_T2star(double T2_star) {
  return quasi_static(std::sqrt(2.0) / T2_star);
}

DephasingModel DephasingModel::ornstein_uhlenbeck(std::vector<OUComponent> components) {
  DephasingModel m;
  m.kind = Kind::kOrnsteinUhlenbeck;
  m.ou = std::move(components);
  return m;
}

DephasingModel DephasingModel::envelope(double T, double p) {
  DephasingModel m;
  m.kind = Kind::kEnvelope;
  m.envelope_T = T;
  m.envelope_p = p;
  return m;
}

void DephasingModel::validate() const {
  switch (kind) {
    case Kind::kNone:
      return;
    case Kind::kQuasiStaticGaussian:
      if (sigma < 0.0) throw Error("DephasingModel: sigma must be non-negative");
      return;
    case Kind::kOrnsteinUhlenbeck:
      for (const auto& c : ou) {
        if (c.sigma < 0.0 || !(c.tau_c > 0.0)) throw Error("DephasingModel: OU needs sigma >= 0 and tau_c > 0");
      }
      return;
    case Kind::kEnvelope:
      if (!(envelope_T > 0.0)) throw Error("DephasingModel: envelope T must be positive");
      if (envelope_p < 1.0 || envelope_p > 3.0) throw Error("DephasingModel: envelope exponent must lie in [1, 3]");
      return;
  }
}

std::vector<double> ExperimentResult::coherence() const {
  std::vector<double> c(p0.size());
  std::transform(p0.begin(), p0.end(), c.begin(), [](double p) { return 2.0 * p - 1.0; });
  return c;
}

std::mt19937_64 realization_rng(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t s = splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

LongitudinalField sample_field(const SequenceSpec& seq, const DephasingModel& noise,
                               const std::optional<ACSignal>& signal, std::mt19937_64& rng, int realization,
                               int n_realizations) {
  LongitudinalField field;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  if (noise.kind == DephasingModel::Kind::kQuasiStaticGaussian) {
    field.static_shift = 0.5 * noise.sigma * gauss(rng);
  }
  if (noise.kind == DephasingModel::Kind::kOrnsteinUhlenbeck && !noise.ou.empty()) {
    field.knots.push_back(0.0);
    for (const auto& s : seq.segments) field.knots.push_back(field.knots.back() + s.duration);
    field.cumulative.assign(field.knots.size(), 0.0);
    for (const auto& c : noise.ou) {
      double eta = c.sigma * gauss(rng);
      double area = 0.0;
      for (std::size_t k = 1; k < field.knots.size(); ++k) {
        const OUStep step = ou_step(eta, field.knots[k] - field.knots[k - 1], c, gauss, rng);
        eta = step.value;
        area += step.integral;
        field.cumulative[k] += 0.5 * area;  // splitting eta enters as eta/2 Sz
      }
    }
  }
  if (signal && signal->B_rms != 0.0) {
    double theta = signal->theta0;
    switch (signal->phase_mode) {
      case ACSignal::Phase::kFixed:
        break;
      case ACSignal::Phase::kRandomUniform:
        theta = kTwoPi * uniform(rng);
        break;
      case ACSignal::Phase::kStratified:
        theta = kTwoPi * (realization + uniform(rng)) / std::max(1, n_realizations);
        break;
      case ACSignal::Phase::kUniformGrid:
        theta = signal->theta0 + kTwoPi * (realization + 0.5) / std::max(1, n_realizations);
        break;
    }
    field.signal = signal->realize(theta);
  }
  return field;
}

ExperimentResult run_experiment(const SweepPlan& plan, const DerivedCouplings& dc, const DephasingModel& noise,
                                const std::optional<ACSignal>& signal, const ReadoutModel& readout,
                                const std::vector<double>& sweep, int n, std::uint64_t seed,
                                const ExperimentOptions& options) {
  if (n < 1) throw Error("run_experiment: need at least one realization");
  if (sweep.empty()) throw Error("run_experiment: sweep is empty");
  if (!plan.make) throw Error("run_experiment: no sequence factory");
  noise.validate();

  ExperimentResult result;
  result.sweep = sweep;
  result.n_realizations = n;
  result.rng_seed = seed;
  result.p0.resize(sweep.size());
  result.stderr_p0.resize(sweep.size());

  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const SequenceSpec seq = plan.make(sweep[i]);
    const std::optional<SequenceSpec> ref =
        plan.reference ? std::optional<SequenceSpec>(plan.reference(sweep[i])) : std::nullopt;
    const double env = envelope_factor(noise, seq);
    std::vector<double> samples(static_cast<std::size_t>(n));
    parallel_for(
        samples.size(),
        [&](std::size_t r) {
          std::mt19937_64 rng = realization_rng(seed, r);
          const LongitudinalField field = sample_field(seq, noise, signal, rng, static_cast<int>(r), n);
          double value = read_out(final_p0(seq, dc, field, options, env), readout, rng);
          if (ref) {
            const double other = read_out(final_p0(*ref, dc, field, options, envelope_factor(noise, *ref)), readout, rng);
            value = 0.5 + 0.5 * (value - other);
          }
          samples[r] = value;
        },
        options.threads);

    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    result.p0[i] = std::clamp(mean, 0.0, 1.0);
    result.stderr_p0[i] = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  }
  return result;
}

ExperimentResult run_correlation(const DerivedCouplings& dc, int N, double tau, const std::vector<double>& t_gaps,
                                 const DephasingModel& noise, const std::optional<ACSignal>& signal,
                                 const ReadoutModel& readout, int n, std::uint64_t seed,
                                 const CorrelationOptions& options, const ExperimentOptions& experiment) {
  CorrelationOptions plus = options;
  plus.store_sign = +1;
  CorrelationOptions minus = options;
  minus.store_sign = -1;
  SweepPlan plan;
  plan.make = [&, plus](double gap) { return build_correlation(dc, N, tau, gap, plus); };
  plan.reference = [&, minus](double gap) { return build_correlation(dc, N, tau, gap, minus); };
  return run_experiment(plan, dc, noise, signal, readout, t_gaps, n, seed, experiment);
}

void write_result_csv(std::ostream& out, const ExperimentResult& result, const std::string& sweep_column,
                      double sweep_scale) {
  out << sweep_column << ",p0_mean,p0_stderr\n";
  char line[128];
  for (std::size_t i = 0; i < result.sweep.size(); ++i) {
    std::snprintf(line, sizeof line, "%.10g,%.12g,%.6g\n", result.sweep[i] / sweep_scale, result.p0[i],
                  result.stderr_p0[i]);
    out << line;
  }
}

}  // namespace geozero
